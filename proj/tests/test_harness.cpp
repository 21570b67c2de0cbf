// Episode driver and metric aggregation: regret/query/confusion accounting,
// budgeted F1 snapshots, deterministic replay, and summary statistics.
#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "pmoal/agent.hpp"
#include "pmoal/baselines.hpp"
#include "pmoal/environment.hpp"
#include "pmoal/game.hpp"
#include "pmoal/harness.hpp"
#include "pmoal/structure.hpp"
#include "support/oracles.hpp"

namespace {

using pmoal::AgentConfig;
using pmoal::BaselineConfig;
using pmoal::Game;
using pmoal::GaussianSpec;
using pmoal::RunRecord;
using pmoal::StreamEnv;
using pmoal::Vec;

Game golden_game() {
  return pmoal::make_label_efficient(pmoal::uniform_cost_spec(2));
}

StreamEnv make_env(long long horizon, std::uint64_t seed,
                   double test_frac = 0.1) {
  GaussianSpec spec;
  auto [features, labels] =
      pmoal::generate_gaussian_data(spec, test_frac, horizon, seed);
  return StreamEnv(golden_game(), std::move(features), std::move(labels),
                   test_frac, horizon, seed);
}

RunRecord synthetic_record(const std::string& agent, std::uint64_t seed,
                           double final_regret, int queries) {
  RunRecord r;
  r.agent = agent;
  r.seed = seed;
  r.horizon = 100;
  r.final_regret = final_regret;
  for (int k = 0; k < queries; ++k) r.query_rounds.push_back(k + 1);
  return r;
}

}  // namespace

TEST_CASE("an outcome-peeking agent accumulates zero regret", "[harness]") {
  StreamEnv env = make_env(200, 21);
  pmoal::testing::OracleAgent oracle(env);
  const RunRecord rec = pmoal::run_episode(oracle, env, 200, 21);

  CHECK(rec.agent == "oracle");
  CHECK(rec.final_regret == 0.0);
  CHECK(rec.query_rounds.empty());
  CHECK(rec.f1_snapshots.empty());
  CHECK(rec.regret_increments.size() == 200);
  // Every round is a prediction round, counted on the confusion diagonal.
  double diag = 0.0, total = 0.0;
  for (std::size_t r = 0; r < rec.confusion.rows(); ++r)
    for (std::size_t c = 0; c < rec.confusion.cols(); ++c) {
      total += rec.confusion(r, c);
      if (r == c) diag += rec.confusion(r, c);
    }
  CHECK(total == 200.0);
  CHECK(diag == 200.0);
}

TEST_CASE("query budgets snapshot exactly at each crossing", "[harness]") {
  StreamEnv env = make_env(120, 33);
  BaselineConfig cfg;
  cfg.hidden = 8;
  cfg.epochs = 2;
  pmoal::AlwaysQueryAgent agent(env.game(), env.n_features(), cfg, 33);
  const RunRecord rec = pmoal::run_episode(agent, env, 120, 33);

  // The forced sweep reaches the reveal action in round 3; every round from
  // then on queries, so budget b is crossed in round b + 2.
  REQUIRE(rec.query_rounds.size() == 118);
  CHECK(rec.query_rounds.front() == 3);
  REQUIRE(rec.f1_snapshots.size() == 4);
  const long long budgets[] = {10, 25, 50, 100};
  const long long rounds[] = {12, 27, 52, 102};
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(rec.f1_snapshots[k].budget == budgets[k]);
    CHECK(rec.f1_snapshots[k].round == rounds[k]);
    CHECK(rec.f1_snapshots[k].f1 >= 0.0);
    CHECK(rec.f1_snapshots[k].f1 <= 1.0);
  }
  // No prediction rounds after the sweep: only two confusion entries.
  double total = 0.0;
  for (std::size_t r = 0; r < rec.confusion.rows(); ++r)
    for (std::size_t c = 0; c < rec.confusion.cols(); ++c)
      total += rec.confusion(r, c);
  CHECK(total == 2.0);
}

TEST_CASE("guards catch mismatched games and horizons", "[harness]") {
  StreamEnv env = make_env(50, 4);
  pmoal::testing::OracleAgent oracle(env);
  CHECK_THROWS_AS(pmoal::run_episode(oracle, env, 60, 4),
                  std::invalid_argument);

  const Game other = pmoal::make_label_efficient(pmoal::uniform_cost_spec(3));
  const auto rep = pmoal::analyze_game(other);
  AgentConfig cfg;
  cfg.nets.hidden = 8;
  pmoal::NeuralCbpAgent mismatched(other, rep, env.n_features(), cfg, 4);
  CHECK_THROWS_AS(pmoal::run_episode(mismatched, env, 50, 4),
                  std::invalid_argument);
}

TEST_CASE("identical seeds replay identical episodes", "[harness]") {
  const Game g = golden_game();
  const auto rep = pmoal::analyze_game(g);
  AgentConfig cfg;
  cfg.nets.hidden = 8;
  cfg.nets.epochs1 = 2;
  cfg.nets.epochs2 = 2;
  cfg.nets.batch_size = 4;

  auto run_once = [&]() {
    StreamEnv env = make_env(60, 17);
    pmoal::NeuralCbpAgent agent(g, rep, env.n_features(), cfg, 17);
    return pmoal::run_episode(agent, env, 60, 17);
  };
  const RunRecord a = run_once();
  const RunRecord b = run_once();

  CHECK(a.final_regret == b.final_regret);
  CHECK(a.regret_increments == b.regret_increments);
  CHECK(a.query_rounds == b.query_rounds);
  CHECK(a.fallback_rounds == b.fallback_rounds);
  REQUIRE(a.f1_snapshots.size() == b.f1_snapshots.size());
  for (std::size_t k = 0; k < a.f1_snapshots.size(); ++k) {
    CHECK(a.f1_snapshots[k].round == b.f1_snapshots[k].round);
    CHECK(a.f1_snapshots[k].f1 == b.f1_snapshots[k].f1);
  }
  CHECK(a.confusion.data() == b.confusion.data());
}

TEST_CASE("metric aggregation: wins, ordering, reference p-value",
          "[harness]") {
  std::vector<RunRecord> records;
  records.push_back(synthetic_record("b", 1, 2.0, 10));
  records.push_back(synthetic_record("b", 2, 1.0, 20));
  records.push_back(synthetic_record("b", 3, 3.0 + 1e-12, 30));
  records.push_back(synthetic_record("a", 1, 1.0, 5));
  records.push_back(synthetic_record("a", 2, 2.0, 5));
  records.push_back(synthetic_record("a", 3, 3.0, 5));

  const auto rows = pmoal::compute_metrics(records, "a");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].agent == "b");  // first appearance wins the row order
  CHECK(rows[1].agent == "a");

  CHECK(rows[1].mean_regret == Catch::Approx(2.0));
  CHECK(rows[1].std_regret == Catch::Approx(1.0));
  CHECK(rows[1].mean_queries == Catch::Approx(5.0));
  CHECK(rows[0].mean_queries == Catch::Approx(20.0));

  // Seeds 1 and 2 split cleanly; seed 3 ties within tolerance for both.
  CHECK(rows[1].win_count == 2);
  CHECK(rows[0].win_count == 2);

  CHECK(rows[1].welch_p_vs_reference == 1.0);
  CHECK(rows[0].welch_p_vs_reference > 0.0);
  CHECK(rows[0].welch_p_vs_reference < 1.0);
}

TEST_CASE("metric aggregation rejects malformed inputs", "[harness]") {
  CHECK_THROWS_AS(pmoal::compute_metrics({}, "a"), std::invalid_argument);

  std::vector<RunRecord> one;
  one.push_back(synthetic_record("a", 1, 1.0, 0));
  one.push_back(synthetic_record("a", 2, 2.0, 0));
  CHECK_THROWS_AS(pmoal::compute_metrics(one, "missing"),
                  std::invalid_argument);

  std::vector<RunRecord> single = one;
  single.push_back(synthetic_record("b", 1, 1.0, 0));
  CHECK_THROWS_AS(pmoal::compute_metrics(single, "a"), std::invalid_argument);

  std::vector<RunRecord> misaligned = one;
  misaligned.push_back(synthetic_record("b", 7, 1.0, 0));
  misaligned.push_back(synthetic_record("b", 8, 2.0, 0));
  CHECK_THROWS_AS(pmoal::compute_metrics(misaligned, "a"),
                  std::invalid_argument);
}
