#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pmoal/eenets.hpp"
#include "pmoal/game.hpp"
#include "pmoal/structure.hpp"

namespace pmoal {

struct AgentConfig {
  EENetsConfig nets;
  double lambda = 1.0;   // Gram regularizer
  double alpha = 1.01;   // exploration rate base (> 1)
  double tol = 1e-7;     // LP strictness threshold
  enum class Norm { max, euclidean };
  Norm norm = Norm::max;  // norm used for both z and the selection weights
  // training cadence over completed rounds t
  int every_round_until = 50;
  int mid_interval = 50;
  int mid_until = 1000;
  int late_interval = 500;

  bool should_train(long long t, int n_actions) const {
    if (t <= n_actions) return false;
    if (t <= every_round_until) return true;
    if (t <= mid_until) return t % mid_interval == 0;
    return t % late_interval == 0;
  }
};

/// Exploration rate f(t) = alpha^(1/3) t^(2/3) log(t)^(1/3).
inline double exploration_rate(double alpha, long long t) {
  if (t < 2) return 0.0;
  const double lt = std::log(static_cast<double>(t));
  return std::cbrt(alpha) * std::pow(static_cast<double>(t), 2.0 / 3.0) * std::cbrt(lt);
}

/// Sherman-Morrison rank-1 update of an inverse Gram matrix:
/// (G + phi phi^T)^-1 from G^-1.
inline void sherman_morrison_update(Matrix& g_inv, const Vec& phi) {
  const Vec gp = g_inv.matvec(phi);
  const double denom = 1.0 + dot(phi, gp);
  for (std::size_t r = 0; r < g_inv.rows(); ++r)
    for (std::size_t c = 0; c < g_inv.cols(); ++c)
      g_inv(r, c) -= gp[r] * gp[c] / denom;
}

/// Everything the selection step decided in one round, for tracing.
struct RoundDecision {
  long long t = 0;
  int action = -1;
  bool forced = false;     // initialization sweep round
  bool fallback = false;   // restriction emptied every cell; reverted to full sets
  std::vector<PairKey> confident_pairs;              // pairs with |delta| >= z
  std::vector<int> plausible_actions;                // Pareto cells meeting D(t)
  std::vector<PairKey> plausible_pairs;              // neighbor pairs meeting D(t)
  std::vector<int> neighborhood_actions;             // union of N+ over those pairs
  std::vector<int> observer_actions;                 // union of V over those pairs
  std::vector<int> underplayed_actions;              // R(x_t)
  std::vector<int> candidate_actions;                // final S(t)
  std::map<PairKey, std::pair<double, double>> pair_estimates;  // (delta_hat, z)
};

/// Confidence-bound partial-monitoring agent over learned symbol
/// distributions. Plays each action once, then alternates between exploiting
/// the restricted plausible set and exploring underplayed observer actions.
class NeuralCbpAgent {
 public:
  NeuralCbpAgent(const Game& game, const StructureReport& report, int input_dim,
                 AgentConfig cfg, std::uint64_t seed)
      : game_(&game), report_(&report), cfg_(cfg) {
    if (cfg_.lambda <= 0.0) throw std::invalid_argument("agent: lambda must be > 0");
    if (cfg_.alpha <= 1.0) throw std::invalid_argument("agent: alpha must be > 1");
    cfg_.nets.seed = derive_seed(seed, "nets");
    nets_.emplace(game, input_dim, cfg_.nets);
    const std::size_t d = static_cast<std::size_t>(nets_->embedding_dim());
    gram_inv_.assign(static_cast<std::size_t>(game.n_actions()),
                     Matrix::identity(d, 1.0 / cfg_.lambda));
    const Vec& w = cfg_.norm == AgentConfig::Norm::max ? report.weights : report.weights_two;
    weights_ = w;
    for (const auto& [pair, vecs] : report.observer_vectors) {
      for (const auto& [a, v] : vecs)
        observer_norms_[pair][a] =
            cfg_.norm == AgentConfig::Norm::max ? norm_inf(v) : norm2(v);
    }
  }

  const Game& game() const { return *game_; }
  const char* name() const { return "neuralcbp"; }
  long long completed_rounds() const { return t_; }
  long long fallback_rounds() const { return fallback_rounds_; }
  const EENets& nets() const { return *nets_; }
  const Matrix& gram_inverse(int action) const { return gram_inv_[action]; }

  /// Decide the action for round t_+1. The first N rounds sweep the actions
  /// in index order; afterwards the full selection pipeline runs.
  RoundDecision decide(const Vec& x) const {
    RoundDecision d;
    d.t = t_ + 1;
    if (d.t <= game_->n_actions()) {
      d.forced = true;
      d.action = static_cast<int>(d.t - 1);
      return d;
    }
    select_action(x, d);
    return d;
  }

  /// Consume the feedback of a played round: grow the replay buffer when the
  /// symbol is informative, update the played action's inverse Gram with the
  /// decision-time embedding, then train on schedule.
  void observe(const Vec& x, int action, Symbol h) {
    if (action < 0 || action >= game_->n_actions())
      throw std::invalid_argument("observe: action out of range");
    if (h.action != action || h.index < 0 || h.index >= game_->n_symbols(action))
      throw std::invalid_argument("observe: symbol does not belong to the played action");
    const Vec phi = nets_->embed(x);
    if (game_->is_informative(action)) nets_->add_sample(x, h);
    sherman_morrison_update(gram_inv_[action], phi);
    ++t_;
    if (cfg_.should_train(t_, game_->n_actions()) && nets_->buffer_size() > 0)
      nets_->train();
  }

  /// Most likely class (1-based) under the expert row's symbol estimates.
  int predict_class(const Vec& x) const {
    const int expert = game_->expert_action();
    if (expert < 0)
      throw std::runtime_error("predict_class: game has no outcome-bijective action");
    const Vec pi = nets_->forward_f1(x)[expert];
    Vec score(static_cast<std::size_t>(game_->n_outcomes()), 0.0);
    for (int u = 0; u < game_->n_symbols(expert); ++u)
      score[game_->outcome_of_symbol(Symbol{expert, u})] = pi[u];
    int best = 0;
    for (int v = 1; v < game_->n_outcomes(); ++v)
      if (score[v] > score[best]) best = v;
    return best + 1;
  }

 private:
  void select_action(const Vec& x, RoundDecision& d) const {
    const Vec phi = nets_->embed(x);
    const std::vector<Vec> pi = nets_->forward_f1(x);
    const Vec w = nets_->forward_f2_weights(phi);

    // confidence intervals per neighboring pair
    for (const auto& pair : report_->neighbors) {
      double delta = 0.0, z = 0.0;
      const auto& vecs = report_->observer_vectors.at(pair);
      const auto& norms = observer_norms_.at(pair);
      for (const auto& [a, v] : vecs) {
        delta += dot(v, pi[a]);
        z += norms.at(a) * w[a];
      }
      d.pair_estimates[pair] = {delta, z};
      if (std::fabs(delta) >= z) d.confident_pairs.push_back(pair);
    }

    // restrict to distributions consistent with the confident estimates
    std::vector<SimplexConstraint> restriction;
    for (const auto& pair : d.confident_pairs) {
      const double delta = d.pair_estimates[pair].first;
      if (delta == 0.0) continue;  // degenerate: no direction to cut
      Vec normal = game_->cost_diff(pair.first, pair.second);
      const double s = delta > 0.0 ? 1.0 : -1.0;
      for (auto& v : normal) v *= -s;
      restriction.push_back({std::move(normal), true});
    }

    const std::size_t m = static_cast<std::size_t>(game_->n_outcomes());
    if (restriction.empty()) {
      d.plausible_actions = report_->pareto;
      d.plausible_pairs = report_->neighbors;
    } else {
      for (int i : report_->pareto) {
        auto sys = restriction;
        auto cell = detail::cell_system(*game_, i);
        sys.insert(sys.end(), cell.begin(), cell.end());
        if (simplex_feasibility(m, sys, cfg_.tol).feasible)
          d.plausible_actions.push_back(i);
      }
      if (d.plausible_actions.empty()) {
        d.fallback = true;
        ++fallback_rounds_;
        d.plausible_actions = report_->pareto;
        d.plausible_pairs = report_->neighbors;
      } else {
        for (const auto& pair : report_->neighbors) {
          if (!std::binary_search(d.plausible_actions.begin(), d.plausible_actions.end(),
                                  pair.first) ||
              !std::binary_search(d.plausible_actions.begin(), d.plausible_actions.end(),
                                  pair.second))
            continue;
          auto sys = restriction;
          auto ci = detail::cell_system(*game_, pair.first);
          auto cj = detail::cell_system(*game_, pair.second);
          sys.insert(sys.end(), ci.begin(), ci.end());
          sys.insert(sys.end(), cj.begin(), cj.end());
          if (simplex_feasibility(m, sys, cfg_.tol).feasible)
            d.plausible_pairs.push_back(pair);
        }
      }
    }

    std::set<int> neighborhood, observers;
    for (const auto& pair : d.plausible_pairs) {
      const auto& nplus = report_->neighborhood_sets.at(pair);
      neighborhood.insert(nplus.begin(), nplus.end());
      const auto& v = report_->observer_sets.at(pair);
      observers.insert(v.begin(), v.end());
    }
    d.neighborhood_actions.assign(neighborhood.begin(), neighborhood.end());
    d.observer_actions.assign(observers.begin(), observers.end());

    // underplayed actions by Gram pseudo-count against the exploration rate
    const double rate = exploration_rate(cfg_.alpha, d.t);
    for (int a = 0; a < game_->n_actions(); ++a) {
      const double quad = dot(phi, gram_inv_[a].matvec(phi));
      const double pseudo_count =
          quad > 1e-300 ? 1.0 / quad : std::numeric_limits<double>::infinity();
      const double eta = std::pow(weights_[a], 2.0 / 3.0);
      if (pseudo_count < eta * rate) d.underplayed_actions.push_back(a);
    }

    std::set<int> cand(d.plausible_actions.begin(), d.plausible_actions.end());
    cand.insert(d.neighborhood_actions.begin(), d.neighborhood_actions.end());
    for (int a : d.observer_actions)
      if (std::binary_search(d.underplayed_actions.begin(), d.underplayed_actions.end(), a))
        cand.insert(a);
    d.candidate_actions.assign(cand.begin(), cand.end());

    int best = d.candidate_actions.front();
    double best_score = -1.0;
    for (int a : d.candidate_actions) {
      const double score = weights_[a] * w[a];
      if (score > best_score) {
        best_score = score;
        best = a;
      }
    }
    d.action = best;
  }

  const Game* game_;
  const StructureReport* report_;
  AgentConfig cfg_;
  std::optional<EENets> nets_;
  std::vector<Matrix> gram_inv_;
  Vec weights_;
  std::map<PairKey, std::map<int, double>> observer_norms_;
  long long t_ = 0;
  mutable long long fallback_rounds_ = 0;
};

}  // namespace pmoal
