#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pmoal/game.hpp"
#include "pmoal/mlp.hpp"
#include "pmoal/rng.hpp"

namespace pmoal {

struct EENetsConfig {
  int hidden = 100;        // width of every hidden layer
  int depth = 2;           // number of weight layers
  double lr1 = 0.001;      // Adam step size for the estimator net
  double lr2 = 0.001;      // Adam step size for the residual net
  int epochs1 = 40;
  int epochs2 = 40;
  int batch_size = 64;
  int block = 51;          // block-averaging factor for the gradient features
  std::uint64_t seed = 1;
};

/// Average consecutive blocks of `block` entries (final partial block
/// averaged over its actual length).
inline Vec block_reduce(const Vec& v, int block) {
  if (block <= 0) throw std::invalid_argument("block_reduce: block must be positive");
  const std::size_t n = v.size();
  const std::size_t out_len = (n + static_cast<std::size_t>(block) - 1) / block;
  Vec out(out_len, 0.0);
  for (std::size_t j = 0; j < out_len; ++j) {
    const std::size_t lo = j * static_cast<std::size_t>(block);
    const std::size_t hi = std::min(n, lo + static_cast<std::size_t>(block));
    double s = 0.0;
    for (std::size_t k = lo; k < hi; ++k) s += v[k];
    out[j] = s / static_cast<double>(hi - lo);
  }
  return out;
}

/// Paired estimation networks: f1 maps a context to symbol-distribution
/// estimates for the informative actions, f2 maps the embedding of f1's
/// state to confidence widths. Holds the shared replay buffer of queried
/// feedback and the optimizer state of both nets.
class EENets {
 public:
  EENets(const Game& game, int input_dim, EENetsConfig cfg)
      : game_(&game), cfg_(cfg), rng_(derive_seed(cfg.seed, "eenets")) {
    if (cfg.hidden < 1 || cfg.depth < 2)
      throw std::invalid_argument("eenets: need hidden >= 1 and depth >= 2");
    const int sigma = game.sigma_total();
    if (sigma < 1)
      throw std::invalid_argument("eenets: game has no informative actions");
    std::vector<int> w1{input_dim};
    for (int l = 0; l < cfg.depth - 1; ++l) w1.push_back(cfg.hidden);
    w1.push_back(sigma);
    Rng init_rng(derive_seed(cfg.seed, "init"));
    f1_ = Mlp(w1, init_rng);
    embed_dim_ = cfg.hidden + static_cast<int>(block_reduce(
                                  Vec(static_cast<std::size_t>(sigma) * cfg.hidden, 0.0),
                                  cfg.block).size());
    std::vector<int> w2{embed_dim_};
    for (int l = 0; l < cfg.depth - 1; ++l) w2.push_back(cfg.hidden);
    w2.push_back(sigma);
    f2_ = Mlp(w2, init_rng);
    adam1_.init_like(f1_);
    adam2_.init_like(f2_);
  }

  const EENetsConfig& config() const { return cfg_; }
  int embedding_dim() const { return embed_dim_; }
  int input_dim() const { return f1_.widths().front(); }
  const Mlp& f1() const { return f1_; }
  const Mlp& f2() const { return f2_; }
  Mlp& f1() { return f1_; }
  Mlp& f2() { return f2_; }
  std::size_t buffer_size() const { return xs_.size(); }

  /// Per-action symbol-distribution estimates: each informative action's
  /// block of f1's output clamped to [0,1] and renormalized (uniform when
  /// everything clamps to zero); uninformative actions estimate {1}.
  std::vector<Vec> forward_f1(const Vec& x) const {
    const Vec raw = f1_.forward(x);
    std::vector<Vec> out(game_->n_actions());
    for (int a = 0; a < game_->n_actions(); ++a) {
      if (!game_->is_informative(a)) {
        out[a] = Vec{1.0};
        continue;
      }
      const int off = game_->block_offset(a);
      const int sa = game_->n_symbols(a);
      Vec block(raw.begin() + off, raw.begin() + off + sa);
      double sum = 0.0;
      for (auto& v : block) {
        v = std::min(1.0, std::max(0.0, v));
        sum += v;
      }
      if (sum <= 0.0) {
        block.assign(static_cast<std::size_t>(sa), 1.0 / sa);
      } else {
        for (auto& v : block) v /= sum;
      }
      out[a] = std::move(block);
    }
    return out;
  }

  /// Exploration embedding: first-layer ReLU activations concatenated with
  /// the block-averaged flattened gradient of f1's output sum with respect
  /// to the last-layer weights, L2-normalized (zero vector passes through).
  Vec embed(const Vec& x) const {
    Mlp::Trace trace;
    f1_.forward(x, &trace);
    const Vec& first = trace.act[1];              // ReLU(W1 x)
    const Vec& last_hidden = trace.act.back();    // input to the output layer
    const int sigma = game_->sigma_total();
    Vec grad(static_cast<std::size_t>(sigma) * last_hidden.size());
    for (int u = 0; u < sigma; ++u)
      for (std::size_t k = 0; k < last_hidden.size(); ++k)
        grad[static_cast<std::size_t>(u) * last_hidden.size() + k] = last_hidden[k];
    Vec reduced = block_reduce(grad, cfg_.block);
    Vec phi;
    phi.reserve(first.size() + reduced.size());
    phi.insert(phi.end(), first.begin(), first.end());
    phi.insert(phi.end(), reduced.begin(), reduced.end());
    const double n = norm2(phi);
    if (n >= 1e-12)
      for (auto& v : phi) v /= n;
    return phi;
  }

  /// Per-action confidence widths from the residual net: the max of the
  /// action's output block clamped below at zero; uninformative actions 0.
  Vec forward_f2_weights(const Vec& phi) const {
    const Vec raw = f2_.forward(phi);
    Vec w(static_cast<std::size_t>(game_->n_actions()), 0.0);
    for (int a : game_->informative_actions()) {
      const int off = game_->block_offset(a);
      double best = 0.0;
      for (int u = 0; u < game_->n_symbols(a); ++u)
        best = std::max(best, raw[off + u]);
      w[a] = best;
    }
    return w;
  }

  /// Record a queried context/symbol pair. Symbols of uninformative rows
  /// cannot be one-hot encoded and are rejected by encode_symbol.
  void add_sample(const Vec& x, Symbol h) {
    xs_.push_back(x);
    targets_.push_back(encode_symbol(*game_, h));
  }

  /// Two-phase update: fit f1 to the one-hot symbol targets, freeze it,
  /// recompute embeddings and residual targets, then fit f2 to those.
  void train() {
    if (xs_.empty()) throw std::runtime_error("eenets: train on empty buffer");
    run_epochs(f1_, adam1_, xs_, targets_, cfg_.epochs1, cfg_.lr1);
    std::vector<Vec> phis(xs_.size());
    std::vector<Vec> residuals(xs_.size());
    for (std::size_t k = 0; k < xs_.size(); ++k) {
      phis[k] = embed(xs_[k]);
      Vec pred = f1_.forward(xs_[k]);
      Vec r(pred.size());
      for (std::size_t u = 0; u < pred.size(); ++u) r[u] = targets_[k][u] - pred[u];
      residuals[k] = std::move(r);
    }
    run_epochs(f2_, adam2_, phis, residuals, cfg_.epochs2, cfg_.lr2);
  }

 private:
  void run_epochs(Mlp& net, AdamState& adam, const std::vector<Vec>& xs,
                  const std::vector<Vec>& ys, int epochs, double lr) {
    std::vector<std::size_t> order(xs.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::vector<Vec> bx, by;
    std::vector<Matrix> grads;
    for (int e = 0; e < epochs; ++e) {
      rng_.shuffle(order);
      for (std::size_t at = 0; at < order.size(); at += cfg_.batch_size) {
        const std::size_t hi = std::min(order.size(), at + cfg_.batch_size);
        bx.clear();
        by.clear();
        for (std::size_t k = at; k < hi; ++k) {
          bx.push_back(xs[order[k]]);
          by.push_back(ys[order[k]]);
        }
        batch_loss_and_gradient(net, bx, by, grads);
        adam_step(net, adam, grads, lr);
      }
    }
  }

  const Game* game_;
  EENetsConfig cfg_;
  Rng rng_;
  Mlp f1_, f2_;
  AdamState adam1_, adam2_;
  int embed_dim_ = 0;
  std::vector<Vec> xs_;
  std::vector<Vec> targets_;
};

}  // namespace pmoal
