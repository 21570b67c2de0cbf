#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pmoal/linalg.hpp"
#include "pmoal/rng.hpp"

namespace pmoal {

/// Fully connected ReLU network with a linear output layer and no biases.
/// widths = [input, hidden..., output]; weights[l] maps widths[l] -> widths[l+1].
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<int> widths, Rng& rng) : widths_(std::move(widths)) {
    if (widths_.size() < 2) throw std::invalid_argument("mlp: need at least 2 widths");
    weights_.reserve(widths_.size() - 1);
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
      const int fan_in = widths_[l], fan_out = widths_[l + 1];
      Matrix w(fan_out, fan_in);
      const double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
      for (auto& x : w.data()) x = rng.normal(0.0, scale);
      weights_.push_back(std::move(w));
    }
  }

  const std::vector<int>& widths() const { return widths_; }
  std::size_t n_layers() const { return weights_.size(); }
  std::vector<Matrix>& weights() { return weights_; }
  const std::vector<Matrix>& weights() const { return weights_; }

  /// Activations recorded during a forward pass: pre[l] is the l-th layer's
  /// pre-activation, act[l] its input (act[0] = x, ReLU applied in between).
  struct Trace {
    std::vector<Vec> pre;
    std::vector<Vec> act;
  };

  Vec forward(const Vec& x, Trace* trace = nullptr) const {
    if (x.size() != static_cast<std::size_t>(widths_.front()))
      throw std::invalid_argument("mlp: input length mismatch");
    Vec a = x;
    if (trace) {
      trace->pre.clear();
      trace->act.clear();
      trace->act.push_back(a);
    }
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      Vec z = weights_[l].matvec(a);
      if (trace) trace->pre.push_back(z);
      if (l + 1 < weights_.size()) {
        for (auto& v : z) v = v > 0.0 ? v : 0.0;
        if (trace) trace->act.push_back(z);
      }
      a = std::move(z);
    }
    return a;
  }

  /// Accumulate d(0.5*||f(x)-y||^2)/dW into grads, given the forward trace
  /// and the output residual f(x) - y.
  void accumulate_gradient(const Trace& trace, const Vec& residual,
                           std::vector<Matrix>& grads) const {
    Vec delta = residual;
    for (std::size_t l = weights_.size(); l-- > 0;) {
      const Vec& input = trace.act[l];
      Matrix& g = grads[l];
      for (std::size_t r = 0; r < g.rows(); ++r) {
        const double dr = delta[r];
        if (dr == 0.0) continue;
        for (std::size_t c = 0; c < g.cols(); ++c) g(r, c) += dr * input[c];
      }
      if (l == 0) break;
      Vec next = weights_[l].matvec_t(delta);
      const Vec& pre = trace.pre[l - 1];
      for (std::size_t k = 0; k < next.size(); ++k)
        if (pre[k] <= 0.0) next[k] = 0.0;
      delta = std::move(next);
    }
  }

  std::vector<Matrix> zero_gradients() const {
    std::vector<Matrix> g;
    g.reserve(weights_.size());
    for (const auto& w : weights_) g.emplace_back(w.rows(), w.cols());
    return g;
  }

 private:
  std::vector<int> widths_;
  std::vector<Matrix> weights_;
};

/// Mean of 0.5*||f(x)-y||^2 over the batch, with matching mean gradient.
inline double batch_loss_and_gradient(const Mlp& net, const std::vector<Vec>& xs,
                                      const std::vector<Vec>& ys,
                                      std::vector<Matrix>& grads) {
  if (xs.empty() || xs.size() != ys.size())
    throw std::invalid_argument("batch_loss_and_gradient: bad batch");
  grads = net.zero_gradients();
  double loss = 0.0;
  Mlp::Trace trace;
  for (std::size_t b = 0; b < xs.size(); ++b) {
    Vec out = net.forward(xs[b], &trace);
    Vec residual(out.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
      residual[k] = out[k] - ys[b][k];
      loss += 0.5 * residual[k] * residual[k];
    }
    net.accumulate_gradient(trace, residual, grads);
  }
  const double inv = 1.0 / static_cast<double>(xs.size());
  for (auto& g : grads)
    for (auto& v : g.data()) v *= inv;
  return loss * inv;
}

/// Adam optimizer state; step counts persist across training calls.
struct AdamState {
  std::vector<Matrix> m, v;
  long long t = 0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  void init_like(const Mlp& net) {
    m.clear();
    v.clear();
    for (const auto& w : net.weights()) {
      m.emplace_back(w.rows(), w.cols());
      v.emplace_back(w.rows(), w.cols());
    }
    t = 0;
  }
};

inline void adam_step(Mlp& net, AdamState& st, const std::vector<Matrix>& grads,
                      double lr) {
  if (st.m.size() != net.n_layers()) st.init_like(net);
  ++st.t;
  const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.t));
  const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.t));
  for (std::size_t l = 0; l < net.n_layers(); ++l) {
    auto& w = net.weights()[l].data();
    auto& m = st.m[l].data();
    auto& v = st.v[l].data();
    const auto& g = grads[l].data();
    for (std::size_t k = 0; k < w.size(); ++k) {
      m[k] = st.beta1 * m[k] + (1.0 - st.beta1) * g[k];
      v[k] = st.beta2 * v[k] + (1.0 - st.beta2) * g[k] * g[k];
      const double mhat = m[k] / bc1;
      const double vhat = v[k] / bc2;
      w[k] -= lr * mhat / (std::sqrt(vhat) + st.eps);
    }
  }
}

}  // namespace pmoal
