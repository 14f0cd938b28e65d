#include "dagdiff/gripper.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dagdiff/errors.hpp"
#include "dagdiff/rng.hpp"

namespace dagdiff {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

using nlohmann::json;

json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("expected 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}
}  // namespace

GripperModel GripperModel::panda() {
  GripperModel g;
  g.max_width = 0.08;
  g.finger_length = 0.05;
  g.finger_thickness = 0.01;
  g.finger_height = 0.02;
  g.palm_depth = 0.02;

  const double hw = g.max_width / 2;
  const double fl = g.finger_length, ft = g.finger_thickness;
  const double fh = g.finger_height, pd = g.palm_depth;

  g.body_boxes = {
      // palm, spanning the full opening behind the fingers
      {{0, 0, -fl - pd / 2}, {hw + ft, fh / 2, pd / 2}},
      // fingers, outside the closing region
      {{hw + ft / 2, 0, -fl / 2}, {ft / 2, fh / 2, fl / 2}},
      {{-hw - ft / 2, 0, -fl / 2}, {ft / 2, fh / 2, fl / 2}},
  };

  // 30 query points: 6 across the palm face, 8 per finger inner face,
  // 8 spread through the closing region.
  g.query_points.clear();
  for (int i = 0; i < 6; ++i) {
    const double x = -(hw + ft / 2) + i * (2 * (hw + ft / 2)) / 5.0;
    g.query_points.push_back({x, 0, -fl - pd / 2});
  }
  for (double side : {1.0, -1.0}) {
    for (int iy = 0; iy < 2; ++iy) {
      for (int iz = 0; iz < 4; ++iz) {
        const double y = (iy == 0 ? -fh / 4 : fh / 4);
        const double z = -fl + (iz +  0.5) * fl / 4.0;
        g.query_points.push_back({side * hw, y, z});
      }
    }
  }
  for (int iz = 0; iz < 2; ++iz) {
    for (int ix = 0; ix < 4; ++ix) {
      const double x = -hw + (ix + 0.5) * g.max_width / 4.0;
      const double z = (iz == 0 ? 0.0 : -fl / 2);
      g.query_points.push_back({x, 0, z});
    }
  }
  return g;
}

std::string GripperModel::to_json() const {
  json j;
  j["max_width"] = max_width;
  j["closing_axis"] = vec3_to_json(closing_axis);
  j["approach_axis"] = vec3_to_json(approach_axis);
  j["finger_length"] = finger_length;
  j["finger_thickness"] = finger_thickness;
  j["finger_height"] = finger_height;
  j["palm_depth"] = palm_depth;
  j["query_points"] = json::array();
  for (const Vec3& q : query_points) j["query_points"].push_back(vec3_to_json(q));
  j["body_boxes"] = json::array();
  for (const BodyBox& b : body_boxes) {
    j["body_boxes"].push_back(
        {{"center", vec3_to_json(b.center)},
         {"half_extents", vec3_to_json(b.half_extents)}});
  }
  return j.dump(2);
}

GripperModel GripperModel::from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("gripper JSON: ") + e.what());
  }
  GripperModel g;
  g.max_width = j.at("max_width").get<double>();
  g.closing_axis = vec3_from_json(j.at("closing_axis"));
  g.approach_axis = vec3_from_json(j.at("approach_axis"));
  g.finger_length = j.value("finger_length", g.finger_length);
  g.finger_thickness = j.value("finger_thickness", g.finger_thickness);
  g.finger_height = j.value("finger_height", g.finger_height);
  g.palm_depth = j.value("palm_depth", g.palm_depth);
  g.query_points.clear();
  for (const auto& q : j.at("query_points")) g.query_points.push_back(vec3_from_json(q));
  if (g.query_points.size() != 30) {
    throw ConfigError("gripper model requires exactly 30 query points, got " +
                      std::to_string(g.query_points.size()));
  }
  g.body_boxes.clear();
  for (const auto& b : j.at("body_boxes")) {
    g.body_boxes.push_back(
        {vec3_from_json(b.at("center")), vec3_from_json(b.at("half_extents"))});
  }
  return g;
}

GripperModel GripperModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

void GripperModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << to_json() << '\n';
}

std::vector<Vec3> grasp_query_points(const DualPose& h, const GripperModel& g) {
  std::vector<Vec3> out = transform_points(h.first, g.query_points);
  std::vector<Vec3> second = transform_points(h.second, g.query_points);
  out.insert(out.end(), second.begin(), second.end());
  return out;
}

std::optional<std::pair<Contact, Contact>> find_contacts(const TriMesh& m,
                                                         const Pose& p,
                                                         const GripperModel& g) {
  const Vec3 center = p.translation;
  const Vec3 axis = (p.rotation * g.closing_axis).normalized();
  const double half = g.max_width / 2;

  auto hits = ray_hits(m, center, axis, -half, half);
  if (hits.size() < 2) return std::nullopt;

  auto lo = hits[0], hi = hits[0];
  for (const auto& h : hits) {
    if (h.first < lo.first) lo = h;
    if (h.first > hi.first) hi = h;
  }
  if (hi.first - lo.first <= 1e-12) return std::nullopt;
  if (hi.first - lo.first > g.max_width) return std::nullopt;

  // Outward face normals (CCW winding); the contact normal points into the
  // object.
  Contact c1{center + lo.first * axis, -m.face_normal(lo.second)};
  Contact c2{center + hi.first * axis, -m.face_normal(hi.second)};
  return std::make_pair(c1, c2);
}

bool check_collision(const PointCloud& cloud, const Pose& p,
                     const GripperModel& g, double inflate) {
  const Pose inv = p.inverse();
  for (const Vec3& world_pt : cloud.points) {
    const Vec3 q = inv.apply(world_pt);
    for (const BodyBox& b : g.body_boxes) {
      const Vec3 d = (q - b.center).cwiseAbs() - (b.half_extents + Vec3::Constant(inflate));
      if ((d.array() <= 0.0).all()) return true;
    }
  }
  return false;
}

namespace {

// Orthonormal frame with x along `axis` and roll angle about it.
Mat3 frame_about_axis(const Vec3& axis, double roll) {
  const Vec3 x = axis.normalized();
  Vec3 ref = std::abs(x.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitY();
  Vec3 z0 = (ref - ref.dot(x) * x).normalized();
  const Vec3 y0 = z0.cross(x);
  const Vec3 z = std::cos(roll) * z0 + std::sin(roll) * y0;
  const Vec3 y = z.cross(x);
  Mat3 r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  return r;
}

}  // namespace

std::vector<Pose> sample_antipodal_grasps(const TriMesh& m, int count, double mu,
                                          std::uint64_t seed,
                                          const GripperModel& g) {
  if (count < 1) throw ConfigError("sample_antipodal_grasps: count must be >= 1");
  const double cos_cone = std::cos(std::atan(mu));

  Rng rng(seed);
  // Dense surface cloud for the collision filter.
  const PointCloud filter_cloud =
      sample_surface(m, 2000, Rng::splitmix64(seed ^ 0x9e3779b97f4a7c15ull));

  std::vector<Pose> grasps;
  long attempts = 0;
  long accepted = 0;
  const long rate_check_floor = 20000;
  const long hard_budget = std::max<long>(200000, 40000L * count);

  while (accepted < count) {
    ++attempts;
    if (attempts > hard_budget ||
        (attempts >= rate_check_floor &&
         static_cast<double>(accepted) / static_cast<double>(attempts) < 1e-4)) {
      throw SamplingExhaustedError(
          "antipodal sampling acceptance rate below 1e-4 (accepted " +
          std::to_string(accepted) + " of " + std::to_string(attempts) + ")");
    }

    // Two independent area-uniform surface points propose the closing line.
    const PointCloud pts = sample_surface(m, 2, rng.next_u64());
    const Vec3 p1 = pts.points[0];
    const Vec3 p2 = pts.points[1];
    const Vec3 d = p2 - p1;
    const double sep = d.norm();
    if (sep < 1e-6 || sep > g.max_width) continue;
    const Vec3 dir = d / sep;

    const double roll = rng.uniform(0.0, 2.0 * kPi);
    Pose pose;
    pose.rotation = frame_about_axis(dir, roll);
    pose.translation = 0.5 * (p1 + p2);

    // The jaws touch the outermost crossings of the closing line; run the
    // friction-cone test on those actual contacts.
    const auto contacts = find_contacts(m, pose, g);
    if (!contacts) continue;
    if (dir.dot(contacts->first.normal) < cos_cone) continue;
    if ((-dir).dot(contacts->second.normal) < cos_cone) continue;

    if (check_collision(filter_cloud, pose, g, 0.0)) continue;

    grasps.push_back(pose);
    ++accepted;
  }
  return grasps;
}

}  // namespace dagdiff
