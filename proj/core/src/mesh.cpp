#include "dagdiff/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "dagdiff/errors.hpp"

namespace dagdiff {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

Vec3 TriMesh::face_normal(int f) const {
  const auto& tri = faces[f];
  const Vec3 e1 = vertices[tri[1]] - vertices[tri[0]];
  const Vec3 e2 = vertices[tri[2]] - vertices[tri[0]];
  return e1.cross(e2).normalized();
}

double TriMesh::face_area(int f) const {
  const auto& tri = faces[f];
  const Vec3 e1 = vertices[tri[1]] - vertices[tri[0]];
  const Vec3 e2 = vertices[tri[2]] - vertices[tri[0]];
  return 0.5 * e1.cross(e2).norm();
}

double TriMesh::surface_area() const {
  double a = 0;
  for (int f = 0; f < static_cast<int>(faces.size()); ++f) a += face_area(f);
  return a;
}

double TriMesh::volume() const {
  double v = 0;
  for (const auto& tri : faces) {
    v += vertices[tri[0]].dot(vertices[tri[1]].cross(vertices[tri[2]])) / 6.0;
  }
  return v;
}

Vec3 TriMesh::centroid() const {
  // Tetrahedron decomposition against the origin.
  Vec3 c = Vec3::Zero();
  double v = 0;
  for (const auto& tri : faces) {
    const Vec3& a = vertices[tri[0]];
    const Vec3& b = vertices[tri[1]];
    const Vec3& d = vertices[tri[2]];
    const double dv = a.dot(b.cross(d)) / 6.0;
    c += dv * (a + b + d) / 4.0;
    v += dv;
  }
  return c / v;
}

void TriMesh::bounding_box(Vec3& lo, Vec3& hi) const {
  lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  hi = -lo;
  for (const Vec3& v : vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
}

double TriMesh::bounding_radius(const Vec3& center) const {
  double r = 0;
  for (const Vec3& v : vertices) r = std::max(r, (v - center).norm());
  return r;
}

bool TriMesh::is_watertight() const {
  std::map<std::pair<int, int>, int> directed;
  for (const auto& tri : faces) {
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k];
      const int b = tri[(k + 1) % 3];
      if (a == b) return false;
      if (++directed[{a, b}] > 1) return false;  // duplicated directed edge
    }
  }
  for (const auto& [edge, count] : directed) {
    auto rev = directed.find({edge.second, edge.first});
    if (rev == directed.end() || rev->second != 1) return false;
  }
  return true;
}

namespace {

void center_mesh(TriMesh& m) {
  Vec3 lo, hi;
  m.bounding_box(lo, hi);
  const Vec3 c = 0.5 * (lo + hi);
  for (Vec3& v : m.vertices) v -= c;
}

void require_positive(std::initializer_list<double> dims, const char* what) {
  for (double d : dims) {
    if (!(d > 0) || !std::isfinite(d)) {
      throw InvalidDimensionError(std::string(what) + ": dimensions must be positive");
    }
  }
}

}  // namespace

TriMesh make_box(double w, double d, double h) {
  require_positive({w, d, h}, "box");
  TriMesh m;
  const double x = w / 2, y = d / 2, z = h / 2;
  m.vertices = {{-x, -y, -z}, {x, -y, -z}, {x, y, -z}, {-x, y, -z},
                {-x, -y, z},  {x, -y, z},  {x, y, z},  {-x, y, z}};
  // 12 triangles, outward CCW.
  m.faces = {{0, 2, 1}, {0, 3, 2},   // bottom (-z)
             {4, 5, 6}, {4, 6, 7},   // top (+z)
             {0, 1, 5}, {0, 5, 4},   // -y
             {2, 3, 7}, {2, 7, 6},   // +y
             {1, 2, 6}, {1, 6, 5},   // +x
             {3, 0, 4}, {3, 4, 7}};  // -x
  return m;
}

TriMesh make_cylinder(double radius, double height, int segments) {
  require_positive({radius, height}, "cylinder");
  if (segments < 3) throw InvalidDimensionError("cylinder: segments must be >= 3");
  TriMesh m;
  const double z0 = -height / 2, z1 = height / 2;
  for (int i = 0; i < segments; ++i) {
    const double a = 2.0 * kPi * i / segments;
    m.vertices.push_back({radius * std::cos(a), radius * std::sin(a), z0});
    m.vertices.push_back({radius * std::cos(a), radius * std::sin(a), z1});
  }
  const int bottom_center = static_cast<int>(m.vertices.size());
  m.vertices.push_back({0, 0, z0});
  const int top_center = bottom_center + 1;
  m.vertices.push_back({0, 0, z1});
  for (int i = 0; i < segments; ++i) {
    const int j = (i + 1) % segments;
    const int b0 = 2 * i, t0 = 2 * i + 1, b1 = 2 * j, t1 = 2 * j + 1;
    m.faces.push_back({b0, b1, t1});  // side
    m.faces.push_back({b0, t1, t0});
    m.faces.push_back({bottom_center, b1, b0});  // bottom cap faces -z
    m.faces.push_back({top_center, t0, t1});     // top cap faces +z
  }
  return m;
}

TriMesh make_capped_l(double arm_a, double arm_b, double thickness) {
  require_positive({arm_a, arm_b, thickness}, "capped_l");
  if (arm_a <= thickness || arm_b <= thickness) {
    throw InvalidDimensionError("capped_l: arm lengths must exceed thickness");
  }
  const double a = arm_a, b = arm_b, t = thickness;
  // CCW outline of the L in the xy plane; prism extruded from z=0 to z=t.
  const std::array<std::array<double, 2>, 6> outline = {
      {{0, 0}, {a, 0}, {a, t}, {t, t}, {t, b}, {0, b}}};
  // Ear-clipped triangulation of the outline (indices into `outline`).
  const std::array<std::array<int, 3>, 4> top_tris = {
      {{1, 2, 3}, {0, 1, 3}, {0, 3, 4}, {0, 4, 5}}};

  TriMesh m;
  for (const auto& p : outline) m.vertices.push_back({p[0], p[1], 0.0});
  for (const auto& p : outline) m.vertices.push_back({p[0], p[1], t});
  const auto top = [](int i) { return i + 6; };
  for (const auto& tri : top_tris) {
    m.faces.push_back({top(tri[0]), top(tri[1]), top(tri[2])});   // +z
    m.faces.push_back({tri[0], tri[2], tri[1]});                  // -z reversed
  }
  for (int i = 0; i < 6; ++i) {
    const int j = (i + 1) % 6;
    m.faces.push_back({i, j, top(j)});
    m.faces.push_back({i, top(j), top(i)});
  }
  center_mesh(m);
  return m;
}

TriMesh make_plate(double w, double d, double t) {
  require_positive({w, d, t}, "plate");
  return make_box(w, d, t);
}

std::string ShapeSpec::name() const {
  switch (kind) {
    case Kind::Box: return "box";
    case Kind::Cylinder: return "cylinder";
    case Kind::CappedL: return "capped_l";
    case Kind::Plate: return "plate";
  }
  return "?";
}

ShapeSpec ShapeSpec::parse(const std::string& text) {
  ShapeSpec s;
  std::string name = text;
  std::string args;
  if (auto colon = text.find(':'); colon != std::string::npos) {
    name = text.substr(0, colon);
    args = text.substr(colon + 1);
  }
  if (name == "box") {
    s.kind = Kind::Box;
    // Thin enough along z for a 0.08 m jaw.
    s.params = {0.2, 0.16, 0.06};
  } else if (name == "cylinder") {
    s.kind = Kind::Cylinder;
    s.params = {0.025, 0.24, 32};
  } else if (name == "capped_l") {
    s.kind = Kind::CappedL;
    s.params = {0.24, 0.18, 0.05};
  } else if (name == "plate") {
    s.kind = Kind::Plate;
    s.params = {0.3, 0.2, 0.04};
  } else {
    throw ConfigError("unknown shape '" + name + "'");
  }
  if (!args.empty()) {
    std::vector<double> vals;
    std::stringstream ss(args);
    std::string tok;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    if (vals.size() != s.params.size()) {
      throw ConfigError("shape '" + name + "' expects " +
                        std::to_string(s.params.size()) + " parameters");
    }
    s.params = vals;
  }
  return s;
}

TriMesh make_primitive(const ShapeSpec& spec) {
  const auto& p = spec.params;
  switch (spec.kind) {
    case ShapeSpec::Kind::Box: return make_box(p[0], p[1], p[2]);
    case ShapeSpec::Kind::Cylinder:
      return make_cylinder(p[0], p[1], static_cast<int>(p[2]));
    case ShapeSpec::Kind::CappedL: return make_capped_l(p[0], p[1], p[2]);
    case ShapeSpec::Kind::Plate: return make_plate(p[0], p[1], p[2]);
  }
  throw ConfigError("unhandled shape kind");
}

PointCloud sample_surface(const TriMesh& m, int n, std::uint64_t seed) {
  if (n < 1) throw InvalidDimensionError("sample_surface: n must be >= 1");
  std::vector<double> cum(m.faces.size());
  double total = 0;
  for (size_t f = 0; f < m.faces.size(); ++f) {
    total += m.face_area(static_cast<int>(f));
    cum[f] = total;
  }
  Rng rng(seed);
  PointCloud cloud;
  cloud.points.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double pick = rng.uniform() * total;
    const auto it = std::lower_bound(cum.begin(), cum.end(), pick);
    const int f = static_cast<int>(std::min<std::ptrdiff_t>(
        it - cum.begin(), static_cast<std::ptrdiff_t>(cum.size()) - 1));
    double u = rng.uniform(), v = rng.uniform();
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    const auto& tri = m.faces[f];
    cloud.points.push_back(m.vertices[tri[0]] +
                           u * (m.vertices[tri[1]] - m.vertices[tri[0]]) +
                           v * (m.vertices[tri[2]] - m.vertices[tri[0]]));
  }
  return cloud;
}

namespace {

// Closest point on triangle abc to p (Ericson, Real-Time Collision Detection).
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                               const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + (d1 / (d1 - d3)) * ab;

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + (d2 / (d2 - d6)) * ac;

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  }

  const double denom = 1.0 / (va + vb + vc);
  return a + (vb * denom) * ab + (vc * denom) * ac;
}

// Solid angle of triangle abc seen from the origin (van Oosterom-Strackee).
double solid_angle(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double la = a.norm(), lb = b.norm(), lc = c.norm();
  const double numerator = a.dot(b.cross(c));
  const double denom =
      la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
  return 2.0 * std::atan2(numerator, denom);
}

}  // namespace

double sdf(const TriMesh& m, const Vec3& x) {
  double best = std::numeric_limits<double>::infinity();
  double winding = 0;
  for (const auto& tri : m.faces) {
    const Vec3& a = m.vertices[tri[0]];
    const Vec3& b = m.vertices[tri[1]];
    const Vec3& c = m.vertices[tri[2]];
    best = std::min(best, (closest_point_on_triangle(x, a, b, c) - x).norm());
    winding += solid_angle(a - x, b - x, c - x);
  }
  const bool inside = winding > 2.0 * kPi;  // winding number > 1/2
  return inside ? -best : best;
}

std::vector<std::pair<double, int>> ray_hits(const TriMesh& m, const Vec3& origin,
                                             const Vec3& dir, double t_min,
                                             double t_max) {
  std::vector<std::pair<double, int>> hits;
  for (int f = 0; f < static_cast<int>(m.faces.size()); ++f) {
    const auto& tri = m.faces[f];
    const Vec3& a = m.vertices[tri[0]];
    const Vec3 e1 = m.vertices[tri[1]] - a;
    const Vec3 e2 = m.vertices[tri[2]] - a;
    const Vec3 pv = dir.cross(e2);
    const double det = e1.dot(pv);
    if (std::abs(det) < 1e-14) continue;
    const double inv = 1.0 / det;
    const Vec3 tv = origin - a;
    const double u = tv.dot(pv) * inv;
    if (u < -1e-12 || u > 1 + 1e-12) continue;
    const Vec3 qv = tv.cross(e1);
    const double v = dir.dot(qv) * inv;
    if (v < -1e-12 || u + v > 1 + 1e-12) continue;
    const double t = e2.dot(qv) * inv;
    if (t >= t_min && t <= t_max) hits.push_back({t, f});
  }
  return hits;
}

void save_obj(const std::string& path, const TriMesh& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  char buf[128];
  for (const Vec3& v : m.vertices) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    out << buf;
  }
  for (const auto& f : m.faces) {
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }
}

TriMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  TriMesh m;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      Vec3 v;
      if (!(ss >> v.x() >> v.y() >> v.z())) throw ParseError("bad vertex", line_no);
      m.vertices.push_back(v);
    } else if (tag == "f") {
      std::array<int, 3> f{};
      for (int k = 0; k < 3; ++k) {
        std::string tok;
        if (!(ss >> tok)) throw ParseError("bad face", line_no);
        f[k] = std::stoi(tok) - 1;  // supports "i", "i/..", "i//.."
        if (f[k] < 0) throw ParseError("bad face index", line_no);
      }
      m.faces.push_back(f);
    }
  }
  for (const auto& f : m.faces) {
    for (int idx : f) {
      if (idx >= static_cast<int>(m.vertices.size())) {
        throw ParseError("face index out of range in '" + path + "'");
      }
    }
  }
  return m;
}

}  // namespace dagdiff
