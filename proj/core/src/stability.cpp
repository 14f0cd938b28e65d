#include "dagdiff/stability.hpp"

#include <cmath>

#include "dagdiff/errors.hpp"
#include "dagdiff/lp.hpp"

namespace dagdiff {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

std::vector<Vec3> friction_cone_edges(const Contact& c, double mu, int k) {
  const double nn = c.normal.norm();
  if (std::abs(nn - 1.0) > 1e-6) {
    throw DegenerateNormalError("contact normal is not unit length");
  }
  if (mu < 0) throw ConfigError("friction coefficient must be >= 0");
  const Vec3 n = c.normal / nn;
  if (mu == 0.0) return {n};
  if (k < 3) throw ConfigError("cone discretization requires k >= 3");

  const Vec3 ref = std::abs(n.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  const Vec3 u = n.cross(ref).normalized();
  const Vec3 w = n.cross(u);

  std::vector<Vec3> edges;
  edges.reserve(k);
  for (int j = 0; j < k; ++j) {
    const double theta = 2.0 * kPi * j / k;
    edges.push_back((n + mu * (std::cos(theta) * u + std::sin(theta) * w)).normalized());
  }
  return edges;
}

WrenchBasis wrench_basis(const ContactSet& cs, double mu, int k) {
  if (!(cs.torque_scale > 0)) throw ConfigError("torque_scale must be positive");
  WrenchBasis basis;
  std::vector<Wrench> cols;
  int per_contact = 0;
  for (int i = 0; i < 4; ++i) {
    const auto edges = friction_cone_edges(cs.contacts[i], mu, k);
    per_contact = static_cast<int>(edges.size());
    const Vec3 arm = cs.contacts[i].position - cs.reference_point;
    for (const Vec3& f : edges) {
      Wrench w;
      w.head<3>() = f;
      w.tail<3>() = arm.cross(f) / cs.torque_scale;
      cols.push_back(w);
    }
  }
  basis.edges_per_contact = per_contact;
  basis.matrix.resize(6, static_cast<int>(cols.size()));
  for (int j = 0; j < static_cast<int>(cols.size()); ++j) basis.matrix.col(j) = cols[j];
  return basis;
}

void cap_groups(const WrenchBasis& w, const StabilityParams& p,
                std::vector<int>& group_of, Eigen::VectorXd& caps) {
  const int k = w.edges_per_contact;
  const int n = static_cast<int>(w.matrix.cols());
  group_of.resize(n);
  if (p.per_contact_caps) {
    caps = Eigen::VectorXd::Constant(4, p.f_max);
    for (int j = 0; j < n; ++j) group_of[j] = j / k;
  } else {
    caps = Eigen::VectorXd::Constant(2, p.f_max);
    for (int j = 0; j < n; ++j) group_of[j] = (j / k) < 2 ? 0 : 1;
  }
}

namespace {

bool all_basis_probes_feasible(const Eigen::MatrixXd& w,
                               const std::vector<int>& group_of,
                               const Eigen::VectorXd& caps, double beta) {
  for (int axis = 0; axis < 6; ++axis) {
    for (double sign : {1.0, -1.0}) {
      Eigen::VectorXd target = Eigen::VectorXd::Zero(6);
      target(axis) = sign * beta;
      if (!lp_feasible(w, target, group_of, caps)) return false;
    }
  }
  return true;
}

}  // namespace

ForceClosureResult dual_arm_force_closure(const ContactSet& cs,
                                          const StabilityParams& p) {
  const WrenchBasis basis = wrench_basis(cs, p.mu, p.cone_edges);
  std::vector<int> group_of;
  Eigen::VectorXd caps;
  cap_groups(basis, p, group_of, caps);

  ForceClosureResult result;
  if (!all_basis_probes_feasible(basis.matrix, group_of, caps, p.probe)) {
    return result;  // unstable, margin 0
  }
  result.stable = true;

  // Bracket the boundary by doubling, then 8 bisection rounds. The caps make
  // the feasible probe set bounded, so doubling terminates.
  double lo = p.probe;
  double hi = 2.0 * p.probe;
  while (all_basis_probes_feasible(basis.matrix, group_of, caps, hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e9) {
      result.margin = lo;
      return result;
    }
  }
  for (int iter = 0; iter < 8; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (all_basis_probes_feasible(basis.matrix, group_of, caps, mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  result.margin = lo;
  return result;
}

bool gravity_resistance(const ContactSet& cs, double mass,
                        const StabilityParams& p) {
  if (!(mass > 0)) throw ConfigError("mass must be positive");
  const WrenchBasis basis = wrench_basis(cs, p.mu, p.cone_edges);
  std::vector<int> group_of;
  Eigen::VectorXd caps;
  cap_groups(basis, p, group_of, caps);

  Eigen::VectorXd gravity = Eigen::VectorXd::Zero(6);
  gravity(2) = -9.81 * mass;  // torque about the reference point is zero
  return lp_feasible(basis.matrix, gravity, group_of, caps);
}

}  // namespace dagdiff
