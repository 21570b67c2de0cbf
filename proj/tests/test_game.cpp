#include <catch2/catch_amalgamated.hpp>

#include "pmoal/game.hpp"

using namespace pmoal;

namespace {
Game golden() { return make_label_efficient(uniform_cost_spec(2)); }
}  // namespace

TEST_CASE("label-efficient expansion lays out prediction rows plus expert row", "[game]") {
  const Game g = golden();
  REQUIRE(g.n_actions() == 3);
  REQUIRE(g.n_outcomes() == 2);
  CHECK(g.cost_at(0, 0) == 0.0);
  CHECK(g.cost_at(0, 1) == 1.0);
  CHECK(g.cost_at(1, 0) == 1.0);
  CHECK(g.cost_at(1, 1) == 0.0);
  CHECK(g.cost_at(2, 0) == 1.0);
  CHECK(g.cost_at(2, 1) == 1.0);
  // prediction rows are silent, the expert row reveals the outcome
  CHECK(g.n_symbols(0) == 1);
  CHECK(g.n_symbols(1) == 1);
  CHECK(g.n_symbols(2) == 2);
  CHECK(g.symbol_name(Symbol{0, 0}) == "a1");
  CHECK(g.symbol_name(Symbol{1, 0}) == "a2");
  CHECK(g.symbol_name(Symbol{2, 0}) == "y1");
  CHECK(g.symbol_name(Symbol{2, 1}) == "y2");
}

TEST_CASE("signal matrices are the indicator maps of each row's symbols", "[game]") {
  const Game g = golden();
  const Matrix& s0 = g.signal_matrix(0);
  REQUIRE(s0.rows() == 1);
  CHECK(s0(0, 0) == 1.0);
  CHECK(s0(0, 1) == 1.0);
  const Matrix& s2 = g.signal_matrix(2);
  REQUIRE(s2.rows() == 2);
  CHECK(s2(0, 0) == 1.0);
  CHECK(s2(0, 1) == 0.0);
  CHECK(s2(1, 0) == 0.0);
  CHECK(s2(1, 1) == 1.0);
  CHECK(g.informative_actions() == std::vector<int>{2});
  CHECK(g.sigma_total() == 2);
  CHECK(g.block_offset(2) == 0);
  CHECK_FALSE(g.is_informative(0));
  CHECK(g.is_informative(2));
}

TEST_CASE("symbols enumerate per row in first-appearance order", "[game]") {
  Matrix cost(2, 3);
  cost(0, 0) = 0.1; cost(0, 1) = 0.2; cost(0, 2) = 0.3;
  cost(1, 0) = 0.3; cost(1, 1) = 0.2; cost(1, 2) = 0.1;
  const Game g = build_game(cost, {{"b", "a", "b"}, {"x", "x", "x"}});
  REQUIRE(g.n_symbols(0) == 2);
  CHECK(g.symbol_name(Symbol{0, 0}) == "b");  // first appearance wins index 0
  CHECK(g.symbol_name(Symbol{0, 1}) == "a");
  CHECK(g.symbol_at(0, 0) == Symbol{0, 0});
  CHECK(g.symbol_at(0, 1) == Symbol{0, 1});
  CHECK(g.symbol_at(0, 2) == Symbol{0, 0});
  const Matrix& s = g.signal_matrix(0);
  CHECK(s(0, 0) == 1.0);
  CHECK(s(0, 1) == 0.0);
  CHECK(s(0, 2) == 1.0);
  CHECK(s(1, 1) == 1.0);
}

TEST_CASE("identical names in different rows stay distinct symbols", "[game]") {
  Matrix cost(2, 2);
  cost(0, 0) = 0.0; cost(0, 1) = 1.0;
  cost(1, 0) = 1.0; cost(1, 1) = 0.0;
  const Game g = build_game(cost, {{"x", "y"}, {"x", "y"}});
  CHECK(g.n_symbols(0) == 2);
  CHECK(g.n_symbols(1) == 2);
  CHECK(g.symbol_at(0, 0).action == 0);
  CHECK(g.symbol_at(1, 0).action == 1);
  CHECK_FALSE(g.symbol_at(0, 0) == g.symbol_at(1, 0));
  CHECK(g.sigma_total() == 4);
  CHECK(g.block_offset(1) == 2);
}

TEST_CASE("one-hot encoding targets the action's block", "[game]") {
  const Game g = golden();
  const Vec e0 = encode_symbol(g, Symbol{2, 0});
  REQUIRE(e0.size() == 2);
  CHECK(e0[0] == 1.0);
  CHECK(e0[1] == 0.0);
  const Vec e1 = encode_symbol(g, Symbol{2, 1});
  CHECK(e1[0] == 0.0);
  CHECK(e1[1] == 1.0);
  CHECK_THROWS_AS(encode_symbol(g, Symbol{0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(encode_symbol(g, Symbol{2, 5}), std::invalid_argument);
}

TEST_CASE("cost differences and their expectations", "[game]") {
  const Game g = golden();
  const Vec d01 = g.cost_diff(0, 1);
  REQUIRE(d01.size() == 2);
  CHECK(d01[0] == -1.0);
  CHECK(d01[1] == 1.0);
  const Vec d20 = g.cost_diff(2, 0);
  CHECK(d20[0] == 1.0);
  CHECK(d20[1] == 0.0);
  const Vec p{0.25, 0.75};
  CHECK(expected_cost_diff(g, 0, 1, p) == Catch::Approx(0.5));
  CHECK(expected_cost_diff(g, 2, 0, p) == Catch::Approx(0.25));
}

TEST_CASE("feedback distribution is the signal image of the outcome law", "[game]") {
  const Game g = golden();
  const Vec p{0.3, 0.7};
  const Vec pi2 = feedback_distribution(g, 2, p);
  REQUIRE(pi2.size() == 2);
  CHECK(pi2[0] == Catch::Approx(0.3));
  CHECK(pi2[1] == Catch::Approx(0.7));
  const Vec pi0 = feedback_distribution(g, 0, p);
  REQUIRE(pi0.size() == 1);
  CHECK(pi0[0] == Catch::Approx(1.0));
}

TEST_CASE("expert detection needs an outcome-bijective row", "[game]") {
  CHECK(golden().expert_action() == 2);
  Matrix cost(2, 2);
  cost(0, 0) = 0.0; cost(0, 1) = 1.0;
  cost(1, 0) = 1.0; cost(1, 1) = 0.0;
  const Game silent = build_game(cost, {{"a", "a"}, {"b", "b"}});
  CHECK(silent.expert_action() == -1);
  const Game g = golden();
  CHECK(g.outcome_of_symbol(Symbol{2, 0}) == 0);
  CHECK(g.outcome_of_symbol(Symbol{2, 1}) == 1);
  CHECK_THROWS_AS(g.outcome_of_symbol(Symbol{0, 0}), std::invalid_argument);
}

TEST_CASE("cost matrices are validated on construction", "[game]") {
  Matrix bad(2, 2);
  bad(0, 0) = -0.1;
  CHECK_THROWS_AS(build_game(bad, {{"a", "a"}, {"b", "b"}}), std::invalid_argument);
  Matrix high(2, 2);
  high(0, 0) = 1.5;
  CHECK_THROWS_AS(build_game(high, {{"a", "a"}, {"b", "b"}}), std::invalid_argument);
  Matrix ok(2, 2);
  CHECK_THROWS_AS(build_game(ok, {{"a", "a"}}), std::invalid_argument);   // missing row
  CHECK_THROWS_AS(build_game(ok, {{"a"}, {"b", "b"}}), std::invalid_argument);  // short row
}

TEST_CASE("cost spec validation", "[game]") {
  CostSpec spec = uniform_cost_spec(3, 0.5);
  REQUIRE_NOTHROW(spec.validate());
  CHECK(spec.error_costs(0, 0) == 0.0);
  CHECK(spec.error_costs(0, 1) == 1.0);
  spec.query_cost = 1.5;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.query_cost = 0.5;
  spec.error_costs(1, 1) = 0.2;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  CHECK_THROWS_AS(make_label_efficient(uniform_cost_spec(1)), std::invalid_argument);
}

TEST_CASE("games compare by structure", "[game]") {
  CHECK(golden() == golden());
  CostSpec spec = uniform_cost_spec(2, 0.5);
  CHECK_FALSE(golden() == make_label_efficient(spec));
}

TEST_CASE("simplex membership validation", "[game]") {
  CHECK_NOTHROW(check_simplex({0.5, 0.5}, 2));
  CHECK_NOTHROW(check_simplex({1.0, 0.0}, 2));
  CHECK_THROWS_AS(check_simplex({0.6, 0.6}, 2), std::invalid_argument);
  CHECK_THROWS_AS(check_simplex({-0.1, 1.1}, 2), std::invalid_argument);
  CHECK_THROWS_AS(check_simplex({0.5, 0.5}, 3), std::invalid_argument);
}
