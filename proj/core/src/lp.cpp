#include "dagdiff/lp.hpp"

#include <cmath>

#include "dagdiff/errors.hpp"

namespace dagdiff {

namespace {
constexpr double kPivotEps = 1e-11;
constexpr int kIterationBudget = 10000;
}  // namespace

std::optional<Eigen::VectorXd> lp_solve_feasibility(const GroupedLp& lp) {
  const int n = static_cast<int>(lp.a.cols());
  const int m_eq = static_cast<int>(lp.a.rows());
  const int n_groups = static_cast<int>(lp.caps.size());
  const int m = m_eq + n_groups;

  const double b_scale = std::max(1.0, lp.b.cwiseAbs().maxCoeff());
  const double feas_tol = 1e-8 * b_scale;

  // Columns: [x (n)] [slack (n_groups)] [artificial (m_eq)], plus rhs.
  const int n_slack = n_groups;
  const int n_art = m_eq;
  const int n_total = n + n_slack + n_art;

  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m + 1, n_total + 1);

  // Equality rows, flipped so rhs >= 0; artificial basis.
  for (int i = 0; i < m_eq; ++i) {
    const double sign = lp.b(i) < 0 ? -1.0 : 1.0;
    t.row(i).head(n) = sign * lp.a.row(i);
    t(i, n_total) = sign * lp.b(i);
    t(i, n + n_slack + i) = 1.0;
  }
  // Cap rows with slack basis.
  for (int g = 0; g < n_groups; ++g) {
    for (int j = 0; j < n; ++j) {
      if (lp.group_of[j] == g) t(m_eq + g, j) = 1.0;
    }
    t(m_eq + g, n + g) = 1.0;
    t(m_eq + g, n_total) = lp.caps(g);
  }

  // Phase-1 objective: minimize sum of artificials. Express reduced costs by
  // subtracting the artificial rows from the cost row.
  for (int i = 0; i < m_eq; ++i) t.row(m) -= t.row(i);

  std::vector<int> basis(m);
  for (int i = 0; i < m_eq; ++i) basis[i] = n + n_slack + i;
  for (int g = 0; g < n_groups; ++g) basis[m_eq + g] = n + g;

  for (int iter = 0; iter < kIterationBudget; ++iter) {
    // Bland: entering = lowest-index column with negative reduced cost.
    int enter = -1;
    for (int j = 0; j < n + n_slack; ++j) {  // artificials never re-enter
      if (t(m, j) < -kPivotEps) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;  // optimal

    // Ratio test; ties broken by lowest basis variable index (Bland).
    int leave = -1;
    double best_ratio = 0;
    for (int i = 0; i < m; ++i) {
      if (t(i, enter) > kPivotEps) {
        const double ratio = t(i, n_total) / t(i, enter);
        if (leave < 0 || ratio < best_ratio - 1e-15 ||
            (std::abs(ratio - best_ratio) <= 1e-15 && basis[i] < basis[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
    }
    if (leave < 0) break;  // unbounded direction cannot occur in phase 1

    const double pivot = t(leave, enter);
    t.row(leave) /= pivot;
    for (int i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double f = t(i, enter);
      if (f != 0.0) t.row(i) -= f * t.row(leave);
    }
    basis[leave] = enter;

    if (iter == kIterationBudget - 1) {
      throw NumericalFailureError("simplex iteration budget exhausted");
    }
  }

  // Phase-1 optimum = -t(m, rhs); feasible iff artificial residual ~ 0.
  const double residual = -t(m, n_total);
  if (residual > feas_tol) return std::nullopt;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n) x(basis[i]) = std::max(0.0, t(i, n_total));
  }
  return x;
}

bool lp_feasible(const Eigen::MatrixXd& a, const Eigen::VectorXd& target,
                 const std::vector<int>& group_of, const Eigen::VectorXd& caps) {
  GroupedLp lp{a, -target, group_of, caps};
  return lp_solve_feasibility(lp).has_value();
}

}  // namespace dagdiff
