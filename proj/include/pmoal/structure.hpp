#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pmoal/game.hpp"
#include "pmoal/lp.hpp"
#include "pmoal/rng.hpp"

namespace pmoal {

enum class ActionClass { pareto, dominated, degenerate };

inline const char* to_string(ActionClass c) {
  switch (c) {
    case ActionClass::pareto: return "pareto";
    case ActionClass::dominated: return "dominated";
    default: return "degenerate";
  }
}

/// Raised when some neighboring pair's cost difference cannot be written in
/// terms of any candidate set of signal images (the game cannot be learned
/// from its feedback).
struct UnobservableGameError : std::runtime_error {
  UnobservableGameError(int i, int j)
      : std::runtime_error("unobservable game: no observer set exists for pair {" +
                           std::to_string(i + 1) + "," + std::to_string(j + 1) + "}"),
        pair_i(i), pair_j(j) {}
  int pair_i, pair_j;
};

using PairKey = std::pair<int, int>;  // always stored with first < second

struct StructureReport {
  std::vector<ActionClass> classification;
  std::vector<int> pareto;                       // ascending action indices
  std::vector<PairKey> neighbors;                // ascending lexicographic
  std::map<PairKey, std::vector<int>> neighborhood_sets;      // N+ per pair
  std::map<PairKey, std::vector<int>> observer_sets;          // V per pair
  std::map<PairKey, std::map<int, Vec>> observer_vectors;     // v per pair, action
  Vec weights;      // W_a = max over pairs of the max-norm of v (0 if unused)
  Vec weights_two;  // same with the Euclidean norm, for the norm switch
};

namespace detail {

constexpr double kStructureTol = 1e-7;
constexpr double kRankSvThreshold = 1e-7;
constexpr double kObserverResidualTol = 1e-9;
constexpr std::uint64_t kDirectionSeed = 0x1f3a5c7e9b2d4f68ULL;

/// Non-strict halfspace system describing action i's optimality cell.
inline std::vector<SimplexConstraint> cell_system(const Game& g, int i) {
  std::vector<SimplexConstraint> cons;
  cons.reserve(g.n_actions() - 1);
  for (int j = 0; j < g.n_actions(); ++j) {
    if (j == i) continue;
    cons.push_back({g.cost_diff(i, j), false});
  }
  return cons;
}

inline std::vector<Vec> normals_of(const std::vector<SimplexConstraint>& cons) {
  std::vector<Vec> n;
  n.reserve(cons.size());
  for (const auto& c : cons) n.push_back(c.normal);
  return n;
}

/// Affine dimension of {p in simplex : normals.p <= 0}, or -1 when empty.
/// Witnesses come from maximizing 2M seeded random directions; when the
/// system is only feasible within tolerance the constraints are relaxed by
/// the measured deficit first.
inline int affine_dimension(std::size_t m, const std::vector<SimplexConstraint>& cons,
                            double tol) {
  auto feas = simplex_feasibility(m, cons, tol);
  if (!feas.feasible) return -1;
  const double relax =
      std::isfinite(feas.max_slack) ? std::max(0.0, -feas.max_slack) : 0.0;
  const std::vector<Vec> normals = normals_of(cons);
  const Vec rhs(normals.size(), relax);
  std::vector<Vec> witnesses;
  if (!normals.empty()) {
    auto first = simplex_maximize(m, normals, rhs, Vec(m, 0.0));
    if (first.feasible) witnesses.push_back(first.witness);
  } else {
    witnesses.push_back(feas.witness);
  }
  Rng rng(kDirectionSeed);
  for (std::size_t k = 0; k < 2 * m; ++k) {
    Vec dir(m);
    for (auto& d : dir) d = rng.normal();
    auto r = simplex_maximize(m, normals, rhs, dir);
    if (r.feasible) witnesses.push_back(r.witness);
  }
  if (witnesses.empty()) return -1;
  Matrix diffs(witnesses.size() - 1, m);
  for (std::size_t r = 1; r < witnesses.size(); ++r)
    for (std::size_t c = 0; c < m; ++c)
      diffs(r - 1, c) = witnesses[r][c] - witnesses[0][c];
  if (diffs.rows() == 0) return 0;
  return static_cast<int>(numeric_rank(diffs, kRankSvThreshold));
}

/// max of normal.p over the given non-strict system; the system must be
/// feasible (caller guarantees it).
inline double max_over_system(std::size_t m, const std::vector<Vec>& system,
                              const Vec& normal) {
  auto r = simplex_maximize(m, system, normal);
  if (!r.feasible)
    throw std::runtime_error("max_over_system: system unexpectedly infeasible");
  return r.value;
}

/// True iff every point of `inner` (given as its constraint system) also
/// satisfies all constraints of `outer_cell`'s system.
inline bool system_contained_in_cell(const Game& g, std::size_t m,
                                     const std::vector<Vec>& inner_system,
                                     int outer_cell, double tol) {
  for (int j = 0; j < g.n_actions(); ++j) {
    if (j == outer_cell) continue;
    if (max_over_system(m, inner_system, g.cost_diff(outer_cell, j)) > tol) return false;
  }
  return true;
}

}  // namespace detail

/// Slack-maximization feasibility over the game's outcome simplex.
inline FeasibilityResult cell_feasible(const Game& g,
                                       const std::vector<SimplexConstraint>& cons,
                                       double tol = detail::kStructureTol) {
  return simplex_feasibility(static_cast<std::size_t>(g.n_outcomes()), cons, tol);
}

/// Pareto / dominated / degenerate split of the action set.
/// dominated: empty cell. degenerate: non-empty cell strictly inside another
/// action's cell (strictness decided by affine dimension; exactly equal cells
/// break the tie by index, lower stays Pareto).
inline std::vector<ActionClass> classify_actions(const Game& g,
                                                 double tol = detail::kStructureTol) {
  const std::size_t m = static_cast<std::size_t>(g.n_outcomes());
  const int n = g.n_actions();
  std::vector<ActionClass> cls(n, ActionClass::pareto);
  std::vector<std::vector<Vec>> systems(n);
  std::vector<int> dims(n, -1);
  for (int i = 0; i < n; ++i) {
    auto cons = detail::cell_system(g, i);
    systems[i] = detail::normals_of(cons);
    auto feas = simplex_feasibility(m, cons, tol);
    if (!feas.feasible) {
      cls[i] = ActionClass::dominated;
      continue;
    }
    dims[i] = detail::affine_dimension(m, cons, tol);
  }
  for (int i = 0; i < n; ++i) {
    if (cls[i] == ActionClass::dominated) continue;
    for (int k = 0; k < n && cls[i] != ActionClass::degenerate; ++k) {
      if (k == i || cls[k] == ActionClass::dominated) continue;
      if (!detail::system_contained_in_cell(g, m, systems[i], k, tol)) continue;
      if (dims[k] > dims[i]) {
        cls[i] = ActionClass::degenerate;
      } else if (k < i && detail::system_contained_in_cell(g, m, systems[k], i, tol)) {
        cls[i] = ActionClass::degenerate;  // equal cells, higher index yields
      }
    }
  }
  return cls;
}

/// Pairs of Pareto actions whose cells share a boundary of dimension M-2.
inline std::vector<PairKey> neighbor_pairs(const Game& g,
                                           const std::vector<ActionClass>& cls,
                                           double tol = detail::kStructureTol) {
  const std::size_t m = static_cast<std::size_t>(g.n_outcomes());
  std::vector<PairKey> out;
  for (int i = 0; i < g.n_actions(); ++i) {
    if (cls[i] != ActionClass::pareto) continue;
    for (int j = i + 1; j < g.n_actions(); ++j) {
      if (cls[j] != ActionClass::pareto) continue;
      auto cons = detail::cell_system(g, i);
      auto cj = detail::cell_system(g, j);
      cons.insert(cons.end(), cj.begin(), cj.end());
      if (detail::affine_dimension(m, cons, tol) == g.n_outcomes() - 2)
        out.push_back({i, j});
    }
  }
  return out;
}

/// Actions whose cells contain the shared boundary of a neighboring pair.
inline std::vector<int> neighborhood_action_set(const Game& g, int i, int j,
                                                double tol = detail::kStructureTol) {
  const std::size_t m = static_cast<std::size_t>(g.n_outcomes());
  auto cons = detail::cell_system(g, i);
  auto cj = detail::cell_system(g, j);
  cons.insert(cons.end(), cj.begin(), cj.end());
  const auto system = detail::normals_of(cons);
  std::vector<int> out;
  for (int k = 0; k < g.n_actions(); ++k)
    if (detail::system_contained_in_cell(g, m, system, k, tol)) out.push_back(k);
  return out;
}

/// Smallest set of actions whose stacked signal images can express
/// (c_i - c_j)^T, together with the minimum-norm coefficient blocks.
/// Search order: subsets of the informative actions by cardinality then
/// lexicographic order, then the pool widened with {i, j}, then all actions.
struct ObserverDecomposition {
  std::vector<int> actions;
  std::map<int, Vec> vectors;
};

inline ObserverDecomposition observer_decomposition(const Game& g, int i, int j) {
  const std::size_t m = static_cast<std::size_t>(g.n_outcomes());
  const Vec d = g.cost_diff(i, j);

  std::vector<std::vector<int>> pools;
  pools.push_back(g.informative_actions());
  {
    auto widened = g.informative_actions();
    for (int extra : {i, j})
      if (std::find(widened.begin(), widened.end(), extra) == widened.end())
        widened.push_back(extra);
    std::sort(widened.begin(), widened.end());
    pools.push_back(std::move(widened));
  }
  {
    std::vector<int> all(g.n_actions());
    for (int a = 0; a < g.n_actions(); ++a) all[a] = a;
    pools.push_back(std::move(all));
  }

  std::vector<std::vector<int>> tried;
  for (const auto& pool : pools) {
    const std::size_t p = pool.size();
    for (std::size_t card = 1; card <= p; ++card) {
      // lexicographic subsets of the pool at this cardinality
      std::vector<std::size_t> idx(card);
      for (std::size_t k = 0; k < card; ++k) idx[k] = k;
      while (true) {
        std::vector<int> subset(card);
        for (std::size_t k = 0; k < card; ++k) subset[k] = pool[idx[k]];
        if (std::find(tried.begin(), tried.end(), subset) == tried.end()) {
          tried.push_back(subset);
          std::size_t total = 0;
          for (int a : subset) total += static_cast<std::size_t>(g.n_symbols(a));
          Matrix t(m, total);
          std::size_t col = 0;
          for (int a : subset) {
            const Matrix& s = g.signal_matrix(a);  // sigma_a x M
            for (std::size_t u = 0; u < s.rows(); ++u, ++col)
              for (std::size_t v = 0; v < m; ++v) t(v, col) = s(u, v);
          }
          auto sol = min_norm_solve(t, d);
          if (sol.residual_inf <= detail::kObserverResidualTol) {
            ObserverDecomposition out;
            out.actions = subset;
            std::size_t at = 0;
            for (int a : subset) {
              const std::size_t sa = static_cast<std::size_t>(g.n_symbols(a));
              out.vectors[a] = Vec(sol.v.begin() + static_cast<std::ptrdiff_t>(at),
                                   sol.v.begin() + static_cast<std::ptrdiff_t>(at + sa));
              at += sa;
            }
            return out;
          }
        }
        // next combination
        std::size_t k = card;
        while (k > 0 && idx[k - 1] == p - card + (k - 1)) --k;
        if (k == 0) break;
        ++idx[k - 1];
        for (std::size_t r = k; r < card; ++r) idx[r] = idx[r - 1] + 1;
      }
    }
  }
  throw UnobservableGameError(i, j);
}

/// Full offline analysis used by the agent and the CLI.
inline StructureReport analyze_game(const Game& g, double tol = detail::kStructureTol) {
  StructureReport rep;
  rep.classification = classify_actions(g, tol);
  for (int i = 0; i < g.n_actions(); ++i)
    if (rep.classification[i] == ActionClass::pareto) rep.pareto.push_back(i);
  rep.neighbors = neighbor_pairs(g, rep.classification, tol);
  rep.weights.assign(g.n_actions(), 0.0);
  rep.weights_two.assign(g.n_actions(), 0.0);
  for (const auto& pr : rep.neighbors) {
    rep.neighborhood_sets[pr] = neighborhood_action_set(g, pr.first, pr.second, tol);
    auto dec = observer_decomposition(g, pr.first, pr.second);
    rep.observer_sets[pr] = dec.actions;
    rep.observer_vectors[pr] = dec.vectors;
    for (const auto& [a, v] : dec.vectors) {
      rep.weights[a] = std::max(rep.weights[a], norm_inf(v));
      rep.weights_two[a] = std::max(rep.weights_two[a], norm2(v));
    }
  }
  return rep;
}

}  // namespace pmoal
