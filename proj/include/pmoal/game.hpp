#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmoal/linalg.hpp"

namespace pmoal {

/// Opaque feedback symbol: the `index`-th distinct entry (by first appearance)
/// of row `action` of the feedback matrix. Symbols never compare equal across
/// rows, even when their display names collide.
struct Symbol {
  int action = -1;
  int index = -1;
  friend bool operator==(const Symbol& a, const Symbol& b) {
    return a.action == b.action && a.index == b.index;
  }
};

/// A finite partial-monitoring game: cost matrix over actions x outcomes plus
/// a feedback matrix of opaque symbols, with the derived per-action signal
/// structure cached at construction.
class Game {
 public:
  Game(Matrix cost, std::vector<std::vector<std::string>> feedback_names)
      : cost_(std::move(cost)) {
    const std::size_t n = cost_.rows(), m = cost_.cols();
    if (n < 2 || m < 2)
      throw std::invalid_argument("game: need at least 2 actions and 2 outcomes");
    if (feedback_names.size() != n)
      throw std::invalid_argument("game: feedback rows != cost rows");
    for (const auto& row : feedback_names)
      if (row.size() != m)
        throw std::invalid_argument("game: feedback cols != cost cols");
    for (double c : cost_.data())
      if (!(c >= 0.0 && c <= 1.0))
        throw std::invalid_argument("game: cost entries must lie in [0,1]");

    feedback_ids_.assign(n, std::vector<int>(m, -1));
    symbol_names_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::map<std::string, int> seen;
      for (std::size_t v = 0; v < m; ++v) {
        const std::string& name = feedback_names[i][v];
        auto it = seen.find(name);
        if (it == seen.end()) {
          it = seen.emplace(name, static_cast<int>(symbol_names_[i].size())).first;
          symbol_names_[i].push_back(name);
        }
        feedback_ids_[i][v] = it->second;
      }
    }

    signals_.reserve(n);
    block_offset_.assign(n, -1);
    sigma_total_ = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t si = symbol_names_[i].size();
      Matrix s(si, m);
      for (std::size_t v = 0; v < m; ++v) s(feedback_ids_[i][v], v) = 1.0;
      signals_.push_back(std::move(s));
      if (si >= 2) {
        informative_.push_back(static_cast<int>(i));
        block_offset_[i] = sigma_total_;
        sigma_total_ += static_cast<int>(si);
      }
    }
  }

  int n_actions() const { return static_cast<int>(cost_.rows()); }
  int n_outcomes() const { return static_cast<int>(cost_.cols()); }

  const Matrix& cost() const { return cost_; }
  double cost_at(int action, int outcome) const { return cost_(action, outcome); }

  /// c_i - c_j as a length-M vector.
  Vec cost_diff(int i, int j) const {
    Vec d(cost_.cols());
    for (std::size_t v = 0; v < cost_.cols(); ++v) d[v] = cost_(i, v) - cost_(j, v);
    return d;
  }

  int n_symbols(int action) const { return static_cast<int>(symbol_names_[action].size()); }
  const std::string& symbol_name(Symbol s) const { return symbol_names_[s.action][s.index]; }
  const Matrix& signal_matrix(int action) const { return signals_[action]; }
  const std::vector<int>& informative_actions() const { return informative_; }
  bool is_informative(int action) const { return block_offset_[action] >= 0; }
  /// Offset of this action's block in the flattened symbol vector (-1 if
  /// the action is uninformative).
  int block_offset(int action) const { return block_offset_[action]; }
  /// Total symbol count over informative actions.
  int sigma_total() const { return sigma_total_; }

  /// Symbol emitted when `action` is played and the outcome is `outcome`.
  Symbol symbol_at(int action, int outcome) const {
    return Symbol{action, feedback_ids_[action][outcome]};
  }

  /// For a row whose symbols biject with outcomes (an expert row), the
  /// outcome that produces this symbol. Throws otherwise.
  int outcome_of_symbol(Symbol s) const {
    const Matrix& sig = signals_[s.action];
    if (static_cast<int>(sig.rows()) != n_outcomes())
      throw std::invalid_argument("outcome_of_symbol: row is not outcome-bijective");
    int hit = -1;
    for (int v = 0; v < n_outcomes(); ++v) {
      if (sig(s.index, v) > 0.5) {
        if (hit >= 0) throw std::invalid_argument("outcome_of_symbol: row is not outcome-bijective");
        hit = v;
      }
    }
    if (hit < 0) throw std::invalid_argument("outcome_of_symbol: symbol unused");
    return hit;
  }

  /// Highest-index action whose symbols biject with outcomes, or -1.
  int expert_action() const {
    for (int i = n_actions() - 1; i >= 0; --i) {
      if (n_symbols(i) != n_outcomes()) continue;
      bool bijective = true;
      for (int u = 0; u < n_symbols(i) && bijective; ++u) {
        int hits = 0;
        for (int v = 0; v < n_outcomes(); ++v)
          if (signals_[i](u, v) > 0.5) ++hits;
        bijective = hits == 1;
      }
      if (bijective) return i;
    }
    return -1;
  }

  const std::vector<std::vector<std::string>>& symbol_names() const { return symbol_names_; }
  const std::vector<std::vector<int>>& feedback_ids() const { return feedback_ids_; }

  friend bool operator==(const Game& a, const Game& b) {
    return a.cost_ == b.cost_ && a.feedback_ids_ == b.feedback_ids_;
  }

 private:
  Matrix cost_;
  std::vector<std::vector<int>> feedback_ids_;
  std::vector<std::vector<std::string>> symbol_names_;
  std::vector<Matrix> signals_;
  std::vector<int> informative_;
  std::vector<int> block_offset_;
  int sigma_total_ = 0;
};

inline Game build_game(const Matrix& cost,
                       const std::vector<std::vector<std::string>>& feedback) {
  return Game(cost, feedback);
}

/// Cost structure for the query-or-predict game family.
struct CostSpec {
  int n_classes = 2;
  double query_cost = 1.0;
  Matrix error_costs;  // n_classes x n_classes, zero diagonal

  void validate() const {
    if (n_classes < 2) throw std::invalid_argument("cost spec: need at least 2 classes");
    if (!(query_cost >= 0.0 && query_cost <= 1.0))
      throw std::invalid_argument("cost spec: query_cost must lie in [0,1]");
    if (error_costs.rows() != static_cast<std::size_t>(n_classes) ||
        error_costs.cols() != static_cast<std::size_t>(n_classes))
      throw std::invalid_argument("cost spec: error_costs must be n_classes x n_classes");
    for (int i = 0; i < n_classes; ++i) {
      if (error_costs(i, i) != 0.0)
        throw std::invalid_argument("cost spec: error_costs diagonal must be 0");
      for (int j = 0; j < n_classes; ++j)
        if (!(error_costs(i, j) >= 0.0 && error_costs(i, j) <= 1.0))
          throw std::invalid_argument("cost spec: error_costs entries must lie in [0,1]");
    }
  }
};

inline CostSpec uniform_cost_spec(int n_classes, double query_cost = 1.0) {
  CostSpec spec;
  spec.n_classes = n_classes;
  spec.query_cost = query_cost;
  spec.error_costs = Matrix(n_classes, n_classes, 1.0);
  for (int i = 0; i < n_classes; ++i) spec.error_costs(i, i) = 0.0;
  return spec;
}

/// Build the (M+1)-action query-or-predict game: action i < M predicts class
/// i and reveals nothing; action M pays query_cost and reveals the class.
inline Game make_label_efficient(const CostSpec& spec) {
  spec.validate();
  const int m = spec.n_classes;
  Matrix cost(m + 1, m);
  std::vector<std::vector<std::string>> fb(m + 1, std::vector<std::string>(m));
  for (int i = 0; i < m; ++i) {
    const std::string mute = "a" + std::to_string(i + 1);
    for (int v = 0; v < m; ++v) {
      cost(i, v) = spec.error_costs(i, v);
      fb[i][v] = mute;
    }
  }
  for (int v = 0; v < m; ++v) {
    cost(m, v) = spec.query_cost;
    fb[m][v] = "y" + std::to_string(v + 1);
  }
  return Game(std::move(cost), std::move(fb));
}

/// Validates that p is a probability vector over m outcomes within
/// tolerance; throws std::invalid_argument otherwise.
inline void check_simplex(const Vec& p, std::size_t m, double tol = 1e-9) {
  if (p.size() != m) throw std::invalid_argument("distribution has wrong length");
  double s = 0.0;
  for (double x : p) {
    if (x < -tol) throw std::invalid_argument("distribution has negative mass");
    s += x;
  }
  if (std::fabs(s - 1.0) > tol)
    throw std::invalid_argument("distribution does not sum to 1");
}

/// One-hot encoding of a symbol into the concatenated informative-action
/// symbol vector. Errors on symbols of uninformative rows.
inline Vec encode_symbol(const Game& g, Symbol s) {
  if (s.action < 0 || s.action >= g.n_actions() || s.index < 0 ||
      s.index >= g.n_symbols(s.action))
    throw std::invalid_argument("encode_symbol: no such symbol");
  if (!g.is_informative(s.action))
    throw std::invalid_argument("encode_symbol: symbol belongs to an uninformative action");
  Vec e(g.sigma_total(), 0.0);
  e[g.block_offset(s.action) + s.index] = 1.0;
  return e;
}

/// (c_i - c_j) . p for a validated outcome distribution p.
inline double expected_cost_diff(const Game& g, int i, int j, const Vec& p) {
  if (i < 0 || i >= g.n_actions() || j < 0 || j >= g.n_actions())
    throw std::invalid_argument("expected_cost_diff: action out of range");
  check_simplex(p, static_cast<std::size_t>(g.n_outcomes()));
  return dot(g.cost_diff(i, j), p);
}

/// Per-action feedback distribution implied by an outcome distribution:
/// pi_i = S_i p (verifies Property 1 shape; used by tests and diagnostics).
inline Vec feedback_distribution(const Game& g, int action, const Vec& p) {
  check_simplex(p, static_cast<std::size_t>(g.n_outcomes()));
  return g.signal_matrix(action).matvec(p);
}

}  // namespace pmoal
