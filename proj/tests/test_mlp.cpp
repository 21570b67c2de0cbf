// Network building block: forward pass, backprop gradients (checked against
// finite differences and a hand-worked scalar case), and the Adam update.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "pmoal/mlp.hpp"
#include "pmoal/rng.hpp"
#include "support/oracles.hpp"

namespace {
using pmoal::AdamState;
using pmoal::Mlp;
using pmoal::Rng;
using pmoal::Vec;
}  // namespace

TEST_CASE("scalar network: loss, gradient, and first optimizer step by hand",
          "[mlp]") {
  Rng rng(1);
  Mlp net({1, 1}, rng);
  net.weights()[0](0, 0) = 2.0;

  const std::vector<Vec> xs = {{3.0}};
  const std::vector<Vec> ys = {{4.0}};
  auto grads = net.zero_gradients();
  const double loss = pmoal::batch_loss_and_gradient(net, xs, ys, grads);

  // f(x) = 2*3 = 6; residual 2; loss = 0.5 * 2^2 = 2; dL/dw = 2 * 3 = 6.
  CHECK(loss == Catch::Approx(2.0).margin(1e-12));
  CHECK(grads[0](0, 0) == Catch::Approx(6.0).margin(1e-12));

  // First Adam step collapses to lr * g / (|g| + eps).
  AdamState st;
  st.init_like(net);
  pmoal::adam_step(net, st, grads, 0.01);
  CHECK(st.t == 1);
  const double expected = 2.0 - 0.01 * 6.0 / (6.0 + 1e-8);
  CHECK(net.weights()[0](0, 0) == Catch::Approx(expected).margin(1e-12));
}

TEST_CASE("forward trace records layer inputs and pre-activations", "[mlp]") {
  Rng rng(7);
  Mlp net({2, 3, 1}, rng);
  Mlp::Trace trace;
  const Vec x = {0.4, -1.0};
  const Vec out = net.forward(x, &trace);

  REQUIRE(out.size() == 1);
  REQUIRE(trace.pre.size() == 2);
  REQUIRE(trace.act.size() == 2);
  CHECK(trace.act[0] == x);
  REQUIRE(trace.act[1].size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    const double relu = trace.pre[0][k] > 0.0 ? trace.pre[0][k] : 0.0;
    CHECK(trace.act[1][k] == Catch::Approx(relu).margin(1e-15));
  }
}

TEST_CASE("backprop matches finite differences on several shapes", "[mlp]") {
  const std::vector<std::vector<int>> shapes = {{3, 6, 2}, {2, 4, 4, 1}, {5, 8, 3}};
  std::uint64_t seed = 101;
  for (const auto& widths : shapes) {
    Rng rng(seed++);
    Mlp net(widths, rng);
    std::vector<Vec> xs, ys;
    for (int b = 0; b < 4; ++b) {
      Vec x(widths.front()), y(widths.back());
      for (auto& v : x) v = rng.normal();
      for (auto& v : y) v = rng.normal();
      xs.push_back(std::move(x));
      ys.push_back(std::move(y));
    }
    const double err = pmoal::testing::fd_gradient_error(net, xs, ys);
    INFO("widths[0]=" << widths.front() << " layers=" << widths.size() - 1);
    CHECK(err <= 1e-4);
  }
}

TEST_CASE("initialization is seed-deterministic", "[mlp]") {
  Rng a(42), b(42), c(43);
  Mlp na({4, 5, 2}, a), nb({4, 5, 2}, b), nc({4, 5, 2}, c);
  bool same = true, differ = false;
  for (std::size_t l = 0; l < na.n_layers(); ++l) {
    const auto& wa = na.weights()[l].data();
    const auto& wb = nb.weights()[l].data();
    const auto& wc = nc.weights()[l].data();
    for (std::size_t k = 0; k < wa.size(); ++k) {
      same = same && wa[k] == wb[k];
      differ = differ || wa[k] != wc[k];
    }
  }
  CHECK(same);
  CHECK(differ);
}

TEST_CASE("invalid construction and batches are rejected", "[mlp]") {
  Rng rng(3);
  CHECK_THROWS_AS(Mlp({5}, rng), std::invalid_argument);

  Mlp net({2, 2}, rng);
  CHECK_THROWS_AS(net.forward({1.0, 2.0, 3.0}), std::invalid_argument);

  auto grads = net.zero_gradients();
  std::vector<Vec> empty;
  CHECK_THROWS_AS(pmoal::batch_loss_and_gradient(net, empty, empty, grads),
                  std::invalid_argument);
  std::vector<Vec> xs = {{1.0, 0.0}};
  std::vector<Vec> ys;
  CHECK_THROWS_AS(pmoal::batch_loss_and_gradient(net, xs, ys, grads),
                  std::invalid_argument);
}
