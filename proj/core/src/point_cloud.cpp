#include "dagdiff/point_cloud.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "dagdiff/errors.hpp"

namespace dagdiff {

Vec3 PointCloud::centroid() const {
  Vec3 c = Vec3::Zero();
  for (const Vec3& p : points) c += p;
  return c / static_cast<double>(points.size());
}

void PointCloud::bounding_box(Vec3& lo, Vec3& hi) const {
  lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  hi = -lo;
  for (const Vec3& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
}

PointCloud PointCloud::centered(Vec3* offset) const {
  const Vec3 c = centroid();
  if (offset) *offset = c;
  PointCloud out;
  out.points.reserve(points.size());
  for (const Vec3& p : points) out.points.push_back(p - c);
  return out;
}

PointCloud load_ply(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  std::size_t line_no = 0;

  auto next_line = [&]() -> std::string& {
    if (!std::getline(in, line)) throw ParseError("unexpected end of file", line_no);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };

  if (next_line() != "ply") throw ParseError("missing 'ply' magic", line_no);
  if (next_line().rfind("format ascii", 0) != 0) {
    throw ParseError("only ASCII PLY is supported", line_no);
  }

  long vertex_count = -1;
  int x_col = -1, y_col = -1, z_col = -1;
  int prop_col = 0;
  bool in_vertex_element = false;
  while (true) {
    std::istringstream ss(next_line());
    std::string tag;
    ss >> tag;
    if (tag == "end_header") break;
    if (tag == "comment") continue;
    if (tag == "element") {
      std::string name;
      long count = 0;
      ss >> name >> count;
      in_vertex_element = (name == "vertex");
      if (in_vertex_element) vertex_count = count;
      continue;
    }
    if (tag == "property" && in_vertex_element) {
      std::string type, name;
      ss >> type >> name;
      if (name == "x") x_col = prop_col;
      if (name == "y") y_col = prop_col;
      if (name == "z") z_col = prop_col;
      ++prop_col;
    }
  }
  if (vertex_count < 0) throw ParseError("no vertex element", line_no);
  if (vertex_count == 0) throw ParseError("vertex element is empty", line_no);
  if (x_col < 0 || y_col < 0 || z_col < 0) {
    throw ParseError("vertex element lacks x/y/z properties", line_no);
  }

  PointCloud cloud;
  cloud.points.reserve(vertex_count);
  for (long i = 0; i < vertex_count; ++i) {
    std::istringstream ss(next_line());
    float value = 0, x = 0, y = 0, z = 0;
    for (int col = 0; col < prop_col; ++col) {
      if (!(ss >> value)) throw ParseError("short vertex row", line_no);
      if (col == x_col) x = value;
      if (col == y_col) y = value;
      if (col == z_col) z = value;
    }
    cloud.points.push_back({x, y, z});
  }
  return cloud;
}

void save_ply(const std::string& path, const PointCloud& cloud) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.points.size()
      << "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
  char buf[96];
  for (const Vec3& p : cloud.points) {
    // %.9g round-trips IEEE floats exactly.
    std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g\n", static_cast<float>(p.x()),
                  static_cast<float>(p.y()), static_cast<float>(p.z()));
    out << buf;
  }
}

}  // namespace dagdiff
