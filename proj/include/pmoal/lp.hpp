#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pmoal/linalg.hpp"

namespace pmoal {

/// Halfspace over the outcome simplex: normal . p <= 0, or < 0 when strict.
struct SimplexConstraint {
  Vec normal;
  bool strict = false;
};

struct FeasibilityResult {
  bool feasible = false;
  Vec witness;       // a point of the (relaxed) feasible region when one exists
  double max_slack = 0.0;
};

struct DirectionResult {
  bool feasible = false;
  Vec witness;
  double value = 0.0;
};

namespace detail {

constexpr double kPivotEps = 1e-11;
constexpr double kReducedCostEps = 1e-9;

/// Dense full-tableau two-phase simplex for
///   minimize c.x  subject to  A x = b (b >= 0), x >= 0,
/// with Bland's rule. Small problems only.
class DenseSimplex {
 public:
  enum class Status { optimal, infeasible, iteration_limit };

  DenseSimplex(const Matrix& a, const Vec& b, const Vec& c)
      : m_(a.rows()), n_(a.cols()), tab_(a.rows() + 1, a.cols() + a.rows() + 1) {
    // columns: [0, n) real variables, [n, n+m) artificials, last column rhs
    for (std::size_t r = 0; r < m_; ++r) {
      for (std::size_t j = 0; j < n_; ++j) tab_(r, j) = a(r, j);
      tab_(r, n_ + r) = 1.0;
      tab_(r, cols() - 1) = b[r];
    }
    basis_.resize(m_);
    for (std::size_t r = 0; r < m_; ++r) basis_[r] = n_ + r;
    cost_ = c;
  }

  Status solve() {
    // phase 1: minimize the sum of artificials
    setup_objective_phase1();
    Status st = iterate(/*artificials_allowed=*/true);
    if (st != Status::optimal) return st;
    if (objective_value() > 1e-9) return Status::infeasible;
    purge_artificials();
    setup_objective_phase2();
    return iterate(/*artificials_allowed=*/false);
  }

  /// Value of variable j in the final solution.
  double variable(std::size_t j) const {
    for (std::size_t r = 0; r < m_; ++r)
      if (basis_[r] == j) return tab_(r, cols() - 1);
    return 0.0;
  }

  /// Phase-2 objective value (c.x) of the final solution.
  double objective() const {
    double v = 0.0;
    for (std::size_t r = 0; r < m_; ++r)
      if (basis_[r] < n_) v += cost_[basis_[r]] * tab_(r, cols() - 1);
    return v;
  }

 private:
  std::size_t cols() const { return n_ + m_ + 1; }

  void setup_objective_phase1() {
    // reduced costs for minimizing sum of artificials with artificial basis:
    // z-row = -sum of constraint rows over real columns
    obj_.assign(cols(), 0.0);
    for (std::size_t r = 0; r < m_; ++r)
      for (std::size_t j = 0; j < cols(); ++j) obj_[j] -= tab_(r, j);
    for (std::size_t r = 0; r < m_; ++r) obj_[n_ + r] = 0.0;
  }

  void setup_objective_phase2() {
    obj_.assign(cols(), 0.0);
    for (std::size_t j = 0; j < n_; ++j) obj_[j] = cost_[j];
    // make reduced costs of basic variables zero
    for (std::size_t r = 0; r < m_; ++r) {
      const std::size_t bj = basis_[r];
      const double f = obj_[bj];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < cols(); ++j) obj_[j] -= f * tab_(r, j);
    }
  }

  double objective_value() const { return -obj_[cols() - 1]; }

  /// After phase 1, pivot any artificial still in the basis onto a real
  /// column, or mark its row redundant if none is available.
  void purge_artificials() {
    for (std::size_t r = 0; r < m_; ++r) {
      if (basis_[r] < n_) continue;
      std::size_t enter = n_;
      for (std::size_t j = 0; j < n_; ++j) {
        if (std::fabs(tab_(r, j)) > kPivotEps) {
          enter = j;
          break;
        }
      }
      if (enter < n_) {
        pivot(r, enter);
      } else {
        // redundant row: zero it so it can never constrain a pivot
        for (std::size_t j = 0; j < cols(); ++j) tab_(r, j) = 0.0;
      }
    }
  }

  Status iterate(bool artificials_allowed) {
    const std::size_t var_limit = artificials_allowed ? n_ + m_ : n_;
    for (int it = 0; it < 20000; ++it) {
      // Bland's rule: lowest-index column with negative reduced cost
      std::size_t enter = cols();
      for (std::size_t j = 0; j < var_limit; ++j) {
        if (obj_[j] < -kReducedCostEps) {
          enter = j;
          break;
        }
      }
      if (enter == cols()) return Status::optimal;
      // ratio test; Bland tie-break on the smallest basic variable index
      std::size_t leave = m_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < m_; ++r) {
        const double a = tab_(r, enter);
        if (a <= kPivotEps) continue;
        const double ratio = tab_(r, cols() - 1) / a;
        if (ratio < best - 1e-12 ||
            (ratio < best + 1e-12 && (leave == m_ || basis_[r] < basis_[leave]))) {
          best = ratio;
          leave = r;
        }
      }
      if (leave == m_) {
        // unbounded; with our bounded formulations this indicates numerical
        // trouble, surface it as an iteration failure
        return Status::iteration_limit;
      }
      pivot(leave, enter);
    }
    return Status::iteration_limit;
  }

  void pivot(std::size_t row, std::size_t col) {
    const double d = tab_(row, col);
    for (std::size_t j = 0; j < cols(); ++j) tab_(row, j) /= d;
    for (std::size_t r = 0; r < m_; ++r) {
      if (r == row) continue;
      const double f = tab_(r, col);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < cols(); ++j) tab_(r, j) -= f * tab_(row, j);
    }
    const double f = obj_[col];
    if (f != 0.0)
      for (std::size_t j = 0; j < cols(); ++j) obj_[j] -= f * tab_(row, j);
    basis_[row] = col;
  }

  std::size_t m_, n_;
  Matrix tab_;
  Vec obj_;
  Vec cost_;
  std::vector<std::size_t> basis_;
};

}  // namespace detail

/// Feasibility of a constraint system over the M-outcome simplex, decided by
/// slack maximization: strict constraints become normal.p <= -s and s is
/// maximized. When no constraint is strict the slack attaches to all of them,
/// so max_slack measures how interior (or how nearly feasible) the system is.
/// Accept when s* > tol for systems with strict constraints, s* >= -tol
/// otherwise. An empty system is feasible with the uniform witness and
/// max_slack = +infinity.
inline FeasibilityResult simplex_feasibility(std::size_t m,
                                             const std::vector<SimplexConstraint>& cons,
                                             double tol) {
  FeasibilityResult out;
  if (cons.empty()) {
    out.feasible = true;
    out.witness.assign(m, 1.0 / static_cast<double>(m));
    out.max_slack = std::numeric_limits<double>::infinity();
    return out;
  }
  bool any_strict = false;
  for (const auto& c : cons) {
    if (c.normal.size() != m)
      throw std::invalid_argument("simplex_feasibility: constraint length != M");
    any_strict = any_strict || c.strict;
  }
  const std::size_t k = cons.size();
  // variables: p (m), s+ , s-, one LP slack per constraint
  const std::size_t nv = m + 2 + k;
  Matrix a(1 + k, nv);
  Vec b(1 + k, 0.0);
  for (std::size_t i = 0; i < m; ++i) a(0, i) = 1.0;
  b[0] = 1.0;
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t i = 0; i < m; ++i) a(1 + r, i) = cons[r].normal[i];
    const bool carries_slack = any_strict ? cons[r].strict : true;
    if (carries_slack) {
      a(1 + r, m) = 1.0;       // s+
      a(1 + r, m + 1) = -1.0;  // s-
    }
    a(1 + r, m + 2 + r) = 1.0;
  }
  Vec c(nv, 0.0);
  c[m] = -1.0;  // minimize -(s+ - s-)
  c[m + 1] = 1.0;
  detail::DenseSimplex lp(a, b, c);
  const auto st = lp.solve();
  if (st != detail::DenseSimplex::Status::optimal) {
    out.feasible = false;
    out.max_slack = -std::numeric_limits<double>::infinity();
    return out;
  }
  out.max_slack = lp.variable(m) - lp.variable(m + 1);
  out.witness.resize(m);
  for (std::size_t i = 0; i < m; ++i) out.witness[i] = lp.variable(i);
  out.feasible = any_strict ? (out.max_slack > tol) : (out.max_slack >= -tol);
  return out;
}

/// maximize obj.p subject to p in the simplex and normal.p <= rhs for each
/// (non-strict) constraint. rhs entries must be >= 0.
inline DirectionResult simplex_maximize(std::size_t m, const std::vector<Vec>& normals,
                                        const Vec& rhs, const Vec& obj) {
  DirectionResult out;
  const std::size_t k = normals.size();
  const std::size_t nv = m + k;
  Matrix a(1 + k, nv);
  Vec b(1 + k, 0.0);
  for (std::size_t i = 0; i < m; ++i) a(0, i) = 1.0;
  b[0] = 1.0;
  for (std::size_t r = 0; r < k; ++r) {
    if (normals[r].size() != m)
      throw std::invalid_argument("simplex_maximize: constraint length != M");
    for (std::size_t i = 0; i < m; ++i) a(1 + r, i) = normals[r][i];
    a(1 + r, m + r) = 1.0;
    b[1 + r] = rhs[r];
  }
  Vec c(nv, 0.0);
  for (std::size_t i = 0; i < m; ++i) c[i] = -obj[i];  // minimize -obj
  detail::DenseSimplex lp(a, b, c);
  const auto st = lp.solve();
  if (st != detail::DenseSimplex::Status::optimal) {
    out.feasible = false;
    return out;
  }
  out.feasible = true;
  out.witness.resize(m);
  for (std::size_t i = 0; i < m; ++i) out.witness[i] = lp.variable(i);
  out.value = -lp.objective();
  return out;
}

inline DirectionResult simplex_maximize(std::size_t m, const std::vector<Vec>& normals,
                                        const Vec& obj) {
  return simplex_maximize(m, normals, Vec(normals.size(), 0.0), obj);
}

}  // namespace pmoal
