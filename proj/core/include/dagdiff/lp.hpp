#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

namespace dagdiff {

/// Feasibility instance:  find x >= 0  with  A x = b  and, for each group g,
/// sum of x_j over j in group <= cap_g.
struct GroupedLp {
  Eigen::MatrixXd a;          // m_eq x n
  Eigen::VectorXd b;          // m_eq
  std::vector<int> group_of;  // n entries, values in [0, caps.size()); -1 = uncapped
  Eigen::VectorXd caps;       // per-group, strictly positive
};

/// Two-phase dense simplex with Bland's rule (anti-cycling). Returns a
/// feasible point, or nullopt when phase 1 leaves a positive artificial
/// residual. Equality tolerance 1e-8 (scaled by max |b|).
/// Throws NumericalFailureError when the iteration budget is exhausted;
/// callers treat that as infeasible and log.
std::optional<Eigen::VectorXd> lp_solve_feasibility(const GroupedLp& lp);

/// Convenience wrapper: true iff an x >= 0 exists with A x = -target under
/// the group caps.
bool lp_feasible(const Eigen::MatrixXd& a, const Eigen::VectorXd& target,
                 const std::vector<int>& group_of, const Eigen::VectorXd& caps);

}  // namespace dagdiff
