#pragma once

#include <Eigen/Core>
#include <array>
#include <vector>

#include "dagdiff/gripper.hpp"

namespace dagdiff {

using Wrench = Eigen::Matrix<double, 6, 1>;  // [force ; torque/lambda]

/// Four frictional contacts, two per gripper, ordered
/// [g1c1, g1c2, g2c1, g2c2]. Torques are taken about `reference_point` and
/// divided by `torque_scale` so the 6-D wrench is dimensionally homogeneous.
struct ContactSet {
  std::array<Contact, 4> contacts;
  Vec3 reference_point = Vec3::Zero();
  double torque_scale = 1.0;
};

/// Discretized grasp wrench space: column (i*k + j) is edge j of contact i,
/// [f_ij ; ((p_i - ref) x f_ij) / lambda].
struct WrenchBasis {
  Eigen::Matrix<double, 6, Eigen::Dynamic> matrix;
  int edges_per_contact = 0;
};

struct StabilityParams {
  double mu = 0.5;        // friction coefficient
  int cone_edges = 8;     // k
  double f_max = 40.0;    // per-gripper force cap, newtons
  double probe = 1.0;     // basis-wrench magnitude used for the stability test
  bool per_contact_caps = false;  // alternative grouping: one cap per contact
};

struct ForceClosureResult {
  bool stable = false;
  double margin = 0.0;  // largest probe magnitude still feasible, 0 if unstable
};

/// k unit force directions on the friction cone about the contact normal;
/// mu = 0 degenerates to the normal itself. Throws DegenerateNormalError for
/// non-unit normals.
std::vector<Vec3> friction_cone_edges(const Contact& c, double mu, int k);

WrenchBasis wrench_basis(const ContactSet& cs, double mu, int k);

/// Column group index per basis column under the given cap scheme, plus the
/// cap vector. Default: two groups (one per gripper) capped at f_max each.
void cap_groups(const WrenchBasis& w, const StabilityParams& p,
                std::vector<int>& group_of, Eigen::VectorXd& caps);

/// Bounded-force dual-arm force closure: feasible for all 12 signed basis
/// wrenches at the probe magnitude; margin found by doubling + 8 bisection
/// rounds.
ForceClosureResult dual_arm_force_closure(const ContactSet& cs,
                                          const StabilityParams& p);

/// True iff the contacts can cancel the gravity wrench of `mass` kg applied
/// at the reference point.
bool gravity_resistance(const ContactSet& cs, double mass,
                        const StabilityParams& p);

}  // namespace dagdiff
