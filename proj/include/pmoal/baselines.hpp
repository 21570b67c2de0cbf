#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pmoal/game.hpp"
#include "pmoal/mlp.hpp"
#include "pmoal/rng.hpp"

namespace pmoal {

struct BaselineConfig {
  int hidden = 100;
  int depth = 2;
  double lr = 0.001;
  int epochs = 40;
  int batch_size = 64;
  double margin_threshold = 1.0;   // b in the deterministic margin rule
  double cesa_b = 1.0;             // b in the coin rule p = b / (b + |margin|)
  double random_query_prob = 0.5;
  // training cadence, matching the main agent's
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

namespace detail {

/// Shared scorer for the query-or-predict baselines: an MLP trained with
/// squared loss against one-hot class targets on the queried rounds.
class ScorerCore {
 public:
  ScorerCore(const Game& game, int input_dim, const BaselineConfig& cfg,
             std::uint64_t seed)
      : game_(&game), cfg_(cfg), shuffle_rng_(derive_seed(seed, "shuffle")),
        coin_rng_(derive_seed(seed, "coin")) {
    if (game.n_actions() != game.n_outcomes() + 1 ||
        game.expert_action() != game.n_actions() - 1)
      throw std::invalid_argument("baseline: requires the query-or-predict game family");
    std::vector<int> widths{input_dim};
    for (int l = 0; l < cfg.depth - 1; ++l) widths.push_back(cfg.hidden);
    widths.push_back(game.n_outcomes());
    Rng init_rng(derive_seed(seed, "init"));
    net_ = Mlp(widths, init_rng);
    adam_.init_like(net_);
  }

  const Game& game() const { return *game_; }
  int expert() const { return game_->n_actions() - 1; }
  long long completed_rounds() const { return t_; }
  Rng& coin() { return coin_rng_; }

  Vec scores(const Vec& x) const { return net_.forward(x); }

  /// Top class (0-based) and the top-two score gap.
  std::pair<int, double> best_class_and_gap(const Vec& x) const {
    const Vec s = scores(x);
    int best = 0;
    for (std::size_t c = 1; c < s.size(); ++c)
      if (s[c] > s[best]) best = static_cast<int>(c);
    double second = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < s.size(); ++c)
      if (static_cast<int>(c) != best) second = std::max(second, s[c]);
    return {best, s.size() > 1 ? s[best] - second : 0.0};
  }

  void observe(const Vec& x, int action, Symbol h) {
    if (h.action != action)
      throw std::invalid_argument("observe: symbol does not belong to the played action");
    if (action == expert()) {
      const int y = game_->outcome_of_symbol(h);
      Vec target(static_cast<std::size_t>(game_->n_outcomes()), 0.0);
      target[y] = 1.0;
      xs_.push_back(x);
      ys_.push_back(std::move(target));
    }
    ++t_;
    if (cfg_.should_train(t_, game_->n_actions()) && !xs_.empty()) train();
  }

  int predict_class(const Vec& x) const {
    return best_class_and_gap(x).first + 1;
  }

  /// Forced sweep action for round t_+1, or -1 once initialization is done.
  int forced_action() const {
    return t_ + 1 <= game_->n_actions() ? static_cast<int>(t_) : -1;
  }

 private:
  void train() {
    std::vector<std::size_t> order(xs_.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::vector<Vec> bx, by;
    std::vector<Matrix> grads;
    for (int e = 0; e < cfg_.epochs; ++e) {
      shuffle_rng_.shuffle(order);
      for (std::size_t at = 0; at < order.size(); at += cfg_.batch_size) {
        const std::size_t hi = std::min(order.size(), at + cfg_.batch_size);
        bx.clear();
        by.clear();
        for (std::size_t k = at; k < hi; ++k) {
          bx.push_back(xs_[order[k]]);
          by.push_back(ys_[order[k]]);
        }
        batch_loss_and_gradient(net_, bx, by, grads);
        adam_step(net_, adam_, grads, cfg_.lr);
      }
    }
  }

  const Game* game_;
  BaselineConfig cfg_;
  Mlp net_;
  AdamState adam_;
  Rng shuffle_rng_;
  Rng coin_rng_;
  std::vector<Vec> xs_;
  std::vector<Vec> ys_;
  long long t_ = 0;
};

}  // namespace detail

/// Deterministic margin rule: query when the top-two score gap g satisfies
/// g < b / (b + g); b = 0 never queries after the initialization sweep.
class MarginAgent {
 public:
  MarginAgent(const Game& g, int input_dim, const BaselineConfig& cfg, std::uint64_t seed)
      : core_(g, input_dim, cfg, seed), b_(cfg.margin_threshold) {}
  const char* name() const { return "margin"; }
  const Game& game() const { return core_.game(); }
  int decide(const Vec& x) {
    const int forced = core_.forced_action();
    if (forced >= 0) return forced;
    auto [cls, gap] = core_.best_class_and_gap(x);
    const bool query = b_ > 0.0 && gap < b_ / (b_ + gap);
    return query ? core_.expert() : cls;
  }
  void observe(const Vec& x, int action, Symbol h) { core_.observe(x, action, h); }
  int predict_class(const Vec& x) const { return core_.predict_class(x); }

 private:
  detail::ScorerCore core_;
  double b_;
};

/// Selective-sampling coin rule: query with probability b / (b + |gap|).
class CesaAgent {
 public:
  CesaAgent(const Game& g, int input_dim, const BaselineConfig& cfg, std::uint64_t seed)
      : core_(g, input_dim, cfg, seed), b_(cfg.cesa_b) {}
  const char* name() const { return "cesa"; }
  const Game& game() const { return core_.game(); }
  int decide(const Vec& x) {
    const int forced = core_.forced_action();
    if (forced >= 0) return forced;
    auto [cls, gap] = core_.best_class_and_gap(x);
    const double p = b_ > 0.0 ? b_ / (b_ + std::fabs(gap)) : 0.0;
    return core_.coin().bernoulli(p) ? core_.expert() : cls;
  }
  void observe(const Vec& x, int action, Symbol h) { core_.observe(x, action, h); }
  int predict_class(const Vec& x) const { return core_.predict_class(x); }

 private:
  detail::ScorerCore core_;
  double b_;
};

/// Queries on an unbiased coin with fixed probability.
class RandomQueryAgent {
 public:
  RandomQueryAgent(const Game& g, int input_dim, const BaselineConfig& cfg,
                   std::uint64_t seed)
      : core_(g, input_dim, cfg, seed), q_(cfg.random_query_prob) {}
  const char* name() const { return "random"; }
  const Game& game() const { return core_.game(); }
  int decide(const Vec& x) {
    const int forced = core_.forced_action();
    if (forced >= 0) return forced;
    auto [cls, gap] = core_.best_class_and_gap(x);
    (void)gap;
    return core_.coin().bernoulli(q_) ? core_.expert() : cls;
  }
  void observe(const Vec& x, int action, Symbol h) { core_.observe(x, action, h); }
  int predict_class(const Vec& x) const { return core_.predict_class(x); }

 private:
  detail::ScorerCore core_;
  double q_;
};

/// Pays the query cost every single round.
class AlwaysQueryAgent {
 public:
  AlwaysQueryAgent(const Game& g, int input_dim, const BaselineConfig& cfg,
                   std::uint64_t seed)
      : core_(g, input_dim, cfg, seed) {}
  const char* name() const { return "always_query"; }
  const Game& game() const { return core_.game(); }
  int decide(const Vec& x) {
    (void)x;
    const int forced = core_.forced_action();
    return forced >= 0 ? forced : core_.expert();
  }
  void observe(const Vec& x, int action, Symbol h) { core_.observe(x, action, h); }
  int predict_class(const Vec& x) const { return core_.predict_class(x); }

 private:
  detail::ScorerCore core_;
};

using BaselineAgent = std::variant<MarginAgent, CesaAgent, RandomQueryAgent, AlwaysQueryAgent>;

inline BaselineAgent make_baseline(const std::string& kind, const Game& g, int input_dim,
                                   const BaselineConfig& cfg, std::uint64_t seed) {
  if (kind == "margin") return MarginAgent(g, input_dim, cfg, seed);
  if (kind == "cesa") return CesaAgent(g, input_dim, cfg, seed);
  if (kind == "random") return RandomQueryAgent(g, input_dim, cfg, seed);
  if (kind == "always_query") return AlwaysQueryAgent(g, input_dim, cfg, seed);
  throw std::invalid_argument("unknown baseline: " + kind);
}

}  // namespace pmoal
