#include "dagdiff/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "dagdiff/errors.hpp"

namespace dagdiff {

namespace {

constexpr char kMagic[4] = {'D', 'A', 'G', 'D'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw ParseError("checkpoint truncated");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f32_array(std::ostream& out, const double* data, std::size_t n) {
  std::vector<float> buf(n);
  for (std::size_t i = 0; i < n; ++i) buf[i] = static_cast<float>(data[i]);
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(n * sizeof(float)));
}

}  // namespace

std::string model_config_to_json(const ModelConfig& config) {
  nlohmann::json j;
  j["grid_size"] = config.grid_size;
  j["channels"] = config.channels;
  j["extent"] = config.extent;
  j["time_embed_dim"] = config.time_embed_dim;
  j["encoder_hidden"] = config.encoder_hidden;
  j["trunk_width"] = config.trunk_width;
  j["sdf_hidden"] = config.sdf_hidden;
  j["total_steps"] = config.total_steps;
  auto pts = nlohmann::json::array();
  for (const Vec3& q : config.query_points) {
    pts.push_back({q.x(), q.y(), q.z()});
  }
  j["query_points"] = pts;
  return j.dump();
}

ModelConfig model_config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("model config JSON: ") + e.what());
  }
  ModelConfig c;
  c.grid_size = j.at("grid_size").get<int>();
  c.channels = j.at("channels").get<int>();
  c.extent = j.at("extent").get<double>();
  c.time_embed_dim = j.at("time_embed_dim").get<int>();
  c.encoder_hidden = j.at("encoder_hidden").get<int>();
  c.trunk_width = j.at("trunk_width").get<int>();
  c.sdf_hidden = j.at("sdf_hidden").get<int>();
  c.total_steps = j.at("total_steps").get<int>();
  c.query_points.clear();
  for (const auto& q : j.at("query_points")) {
    c.query_points.push_back({q[0].get<double>(), q[1].get<double>(), q[2].get<double>()});
  }
  return c;
}

void save_checkpoint(const std::string& path, const ModelParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(kMagic, 4);
  write_u32(out, kVersion);

  const std::string config = model_config_to_json(params.config);
  write_u32(out, static_cast<std::uint32_t>(config.size()));
  out.write(config.data(), static_cast<std::streamsize>(config.size()));

  std::uint32_t count = 0;
  auto& mutable_params = const_cast<ModelParams&>(params);
  mutable_params.for_each_tensor(
      [&count](const char*, double*, Eigen::Index, Eigen::Index) { ++count; });
  write_u32(out, count);
  mutable_params.for_each_tensor(
      [&out](const char* name, double* data, Eigen::Index rows, Eigen::Index cols) {
        const std::string n(name);
        write_u32(out, static_cast<std::uint32_t>(n.size()));
        out.write(n.data(), static_cast<std::streamsize>(n.size()));
        write_u32(out, static_cast<std::uint32_t>(rows * cols));
        write_f32_array(out, data, static_cast<std::size_t>(rows * cols));
      });
  if (!out) throw IoError("short write to '" + path + "'");
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw ParseError("'" + path + "' is not a checkpoint (bad magic)");
  }
  const std::uint32_t version = read_u32(in);
  if (version != kVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version));
  }

  const std::uint32_t config_len = read_u32(in);
  std::string config_text(config_len, '\0');
  in.read(config_text.data(), config_len);
  if (!in) throw ParseError("checkpoint truncated in config");
  const ModelConfig config = model_config_from_json(config_text);

  Rng scratch(0);
  ModelParams params = ModelParams::init(config, scratch);

  const std::uint32_t count = read_u32(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = read_u32(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const std::uint32_t numel = read_u32(in);
    std::vector<float> buf(numel);
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(numel * sizeof(float)));
    if (!in) throw ParseError("checkpoint truncated in tensor '" + name + "'");

    bool matched = false;
    params.for_each_tensor([&](const char* tname, double* data, Eigen::Index rows,
                               Eigen::Index cols) {
      if (name != tname) return;
      if (static_cast<std::uint32_t>(rows * cols) != numel) {
        throw ParseError("tensor '" + name + "' has unexpected size");
      }
      for (std::uint32_t k = 0; k < numel; ++k) data[k] = buf[k];
      matched = true;
    });
    if (!matched) throw ParseError("unknown tensor '" + name + "' in checkpoint");
  }
  return params;
}

}  // namespace dagdiff
