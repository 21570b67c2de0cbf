// Serialization layer: JSON parsing and emission for games, reports, run
// records, environment specs, experiment configs, and the summary CSV.
#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <string>
#include <vector>

#include "pmoal/game.hpp"
#include "pmoal/harness.hpp"
#include "pmoal/io.hpp"
#include "pmoal/structure.hpp"

namespace {

using pmoal::Game;
using pmoal::Json;
using pmoal::Matrix;
using pmoal::RunRecord;
using pmoal::Vec;

Game golden_game() {
  return pmoal::make_label_efficient(pmoal::uniform_cost_spec(2));
}

}  // namespace

TEST_CASE("numbers serialize as shortest round-trip decimals", "[io]") {
  CHECK(pmoal::number_repr(0.5) == "0.5");
  CHECK(pmoal::number_repr(1.0) == "1.0");
  CHECK(pmoal::number_repr(0.0) == "0.0");
  for (double v : {0.1, 1.0 / 3.0, 2e-9, 12345.6789}) {
    CHECK(std::stod(pmoal::number_repr(v)) == v);
  }
}

TEST_CASE("matrix JSON round trip and validation", "[io]") {
  Matrix m(2, 3);
  m(0, 0) = 1.5;
  m(1, 2) = -0.25;
  const Json j = pmoal::matrix_to_json(m);
  const Matrix back = pmoal::matrix_from_json(j, "test");
  CHECK(back.data() == m.data());

  CHECK_THROWS_AS(pmoal::matrix_from_json(Json::parse("[[1,2],[3]]"), "t"),
                  std::runtime_error);
  CHECK_THROWS_AS(pmoal::matrix_from_json(Json::parse("[[1,\"x\"]]"), "t"),
                  std::runtime_error);
  CHECK_THROWS_AS(pmoal::matrix_from_json(Json::parse("[]"), "t"),
                  std::runtime_error);
  CHECK_THROWS_AS(pmoal::matrix_from_json(Json::parse("3"), "t"),
                  std::runtime_error);
}

TEST_CASE("games parse from explicit tables and from cost specs", "[io]") {
  const Game golden = golden_game();

  const Game back = pmoal::game_from_json(pmoal::game_to_json(golden));
  CHECK(back == golden);

  const Game from_spec = pmoal::game_from_json(Json::parse(R"({"n_classes": 2})"));
  CHECK(from_spec == golden);

  const Game weighted = pmoal::game_from_json(Json::parse(
      R"({"n_classes": 2, "query_cost": 0.5, "error_costs": [[0, 0.5], [1, 0]]})"));
  CHECK(weighted.cost_at(0, 1) == 0.5);
  CHECK(weighted.cost_at(1, 0) == 1.0);
  CHECK(weighted.cost_at(2, 0) == 0.5);
  CHECK(weighted.cost_at(2, 1) == 0.5);

  CHECK_THROWS_AS(pmoal::game_from_json(Json::object()), std::runtime_error);
  CHECK_THROWS_AS(pmoal::game_from_json(Json::parse(
                      R"({"cost": [[0, 1]], "feedback": [["a", "b"], ["c", "d"]]})")),
                  std::runtime_error);
}

TEST_CASE("structure report serializes with one-based indices", "[io]") {
  const Game g = golden_game();
  const auto rep = pmoal::analyze_game(g);
  const Json j = pmoal::report_to_json(g, rep);

  CHECK(j.at("n_actions") == 3);
  CHECK(j.at("n_outcomes") == 2);
  CHECK(j.at("pareto") == Json::parse("[1,2]"));
  CHECK(j.at("dominated") == Json::parse("[3]"));
  CHECK(j.at("degenerate") == Json::parse("[]"));
  CHECK(j.at("informative") == Json::parse("[3]"));
  CHECK(j.at("sigma") == Json::parse("[1,1,2]"));
  CHECK(j.at("sigma_total") == 2);
  CHECK(j.at("neighbors") == Json::parse("[[1,2]]"));
  CHECK(j.at("neighborhood_sets").at("1,2") == Json::parse("[1,2]"));
  CHECK(j.at("observer_sets").at("1,2") == Json::parse("[3]"));
  const Json& v = j.at("observer_vectors").at("1,2").at("3");
  REQUIRE(v.size() == 2);
  CHECK(v[0].get<double>() == Catch::Approx(-1.0).margin(1e-9));
  CHECK(v[1].get<double>() == Catch::Approx(1.0).margin(1e-9));
  CHECK(j.at("weights")[2].get<double>() == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("run records serialize without timing noise", "[io]") {
  RunRecord r;
  r.agent = "margin";
  r.seed = 9;
  r.horizon = 4;
  r.regret_increments = {0.0, 1.0, 0.0, 1.0};
  r.final_regret = 2.0;
  r.query_rounds = {2, 4};
  r.confusion = Matrix(2, 2);
  r.confusion(0, 0) = 3.0;  // predicted 1, true 1
  r.confusion(0, 1) = 1.0;  // predicted 1, true 2
  r.confusion(1, 0) = 2.0;  // predicted 2, true 1
  r.confusion(1, 1) = 4.0;  // predicted 2, true 2
  r.fallback_rounds = 1;
  r.wall_clock_seconds = 123.456;

  const Json j = pmoal::record_to_json(r);
  CHECK(j.at("agent") == "margin");
  CHECK(j.at("seed") == 9);
  CHECK(j.at("query_count") == 2);
  CHECK(j.at("query_rounds") == Json::parse("[2,4]"));
  // Class 2 is the positive label of the two-class report.
  CHECK(j.at("tp") == 4.0);
  CHECK(j.at("fp") == 2.0);
  CHECK(j.at("fn") == 1.0);
  CHECK(j.at("tn") == 3.0);
  CHECK(j.at("fallback_rounds") == 1);
  CHECK(j.at("f1_snapshots") == Json::array());
  CHECK_FALSE(j.contains("wall_clock_seconds"));
  CHECK(j.dump().find("123.456") == std::string::npos);
}

TEST_CASE("decision traces carry the round's selection sizes", "[io]") {
  pmoal::RoundDecision d;
  d.t = 7;
  d.action = 2;
  d.plausible_actions = {0, 1};
  d.candidate_actions = {0, 1, 2};
  d.pair_estimates[{0, 1}] = {-0.25, 0.75};

  const Json j = pmoal::decision_to_json(d, true);
  CHECK(j.at("t") == 7);
  CHECK(j.at("action") == 3);  // one-based outside
  CHECK(j.at("queried") == true);
  CHECK(j.at("n_plausible_actions") == 2);
  CHECK(j.at("n_candidate_actions") == 3);
  CHECK(j.at("pairs").at("1,2").at("delta").get<double>() == -0.25);
  CHECK(j.at("pairs").at("1,2").at("z").get<double>() == 0.75);
}

TEST_CASE("environment specs parse with defaults and validation", "[io]") {
  const auto gauss = pmoal::env_spec_from_json(
      Json::parse(R"({"kind": "gaussian"})"));
  CHECK(gauss.gauss.n_classes == 2);
  CHECK(gauss.gauss.n_features == 2);
  CHECK(gauss.gauss.separation == 3.0);
  CHECK(gauss.test_frac == 0.15);
  CHECK_FALSE(gauss.with_replacement);

  const auto custom = pmoal::env_spec_from_json(Json::parse(
      R"({"kind": "gaussian", "M": 3, "d": 5, "sep": 1.5, "test_frac": 0.2})"));
  CHECK(custom.gauss.n_classes == 3);
  CHECK(custom.gauss.n_features == 5);
  CHECK(custom.gauss.separation == 1.5);

  const auto csv = pmoal::env_spec_from_json(Json::parse(
      R"({"kind": "csv", "path": "x.csv", "label_column": "y", "n_classes": 4})"));
  CHECK(csv.csv_path == "x.csv");
  CHECK(csv.n_classes == 4);

  CHECK_THROWS_AS(pmoal::env_spec_from_json(Json::parse(R"({"kind": "other"})")),
                  std::runtime_error);
  CHECK_THROWS(pmoal::env_spec_from_json(Json::parse(R"({"kind": "csv"})")));

  // A game override must agree with the declared class count.
  auto clash = pmoal::env_spec_from_json(Json::parse(
      R"({"kind": "gaussian", "M": 2, "game": {"n_classes": 3}})"));
  CHECK_THROWS_AS(pmoal::build_env(clash, 10, 1), std::runtime_error);
}

TEST_CASE("agent and baseline configs apply partial overrides", "[io]") {
  const auto agent = pmoal::agent_config_from_json(Json::parse(
      R"({"nets": {"hidden": 32}, "alpha": 1.5, "norm": "euclidean"})"));
  CHECK(agent.nets.hidden == 32);
  CHECK(agent.nets.epochs1 == 40);  // untouched default
  CHECK(agent.alpha == 1.5);
  CHECK(agent.lambda == 1.0);
  CHECK(agent.norm == pmoal::AgentConfig::Norm::euclidean);

  CHECK_THROWS_AS(pmoal::agent_config_from_json(Json::parse(R"({"norm": "l1"})")),
                  std::runtime_error);

  const auto baseline = pmoal::baseline_config_from_json(Json::parse(
      R"({"margin_threshold": 0.2, "epochs": 5})"));
  CHECK(baseline.margin_threshold == 0.2);
  CHECK(baseline.epochs == 5);
  CHECK(baseline.hidden == 100);
}

TEST_CASE("bench configs expand seed ranges and pick a reference", "[io]") {
  const auto listed = pmoal::bench_config_from_json(Json::parse(R"({
    "agents": ["neuralcbp", "margin"],
    "seeds": [5, 6],
    "horizon": 100,
    "env": {"kind": "gaussian"}
  })"));
  CHECK(listed.seeds == std::vector<std::uint64_t>{5, 6});
  CHECK(listed.reference == "neuralcbp");
  CHECK(listed.horizon == 100);
  CHECK(listed.threads == 1);

  const auto ranged = pmoal::bench_config_from_json(Json::parse(R"({
    "agents": ["margin"],
    "n_seeds": 3,
    "first_seed": 10,
    "horizon": 50,
    "env": {"kind": "gaussian"},
    "reference": "margin",
    "threads": 2
  })"));
  CHECK(ranged.seeds == std::vector<std::uint64_t>{10, 11, 12});
  CHECK(ranged.threads == 2);

  const auto default_seeds = pmoal::bench_config_from_json(Json::parse(R"({
    "agents": ["margin"],
    "n_seeds": 2,
    "horizon": 50,
    "env": {"kind": "gaussian"}
  })"));
  CHECK(default_seeds.seeds == std::vector<std::uint64_t>{1, 2});

  CHECK_THROWS(pmoal::bench_config_from_json(Json::parse(R"({"horizon": 5})")));
  CHECK_THROWS_AS(pmoal::bench_config_from_json(Json::parse(R"({
    "agents": ["margin"], "n_seeds": 1, "horizon": 5,
    "env": {"kind": "gaussian"}, "threads": 0
  })")),
                  std::runtime_error);
}

TEST_CASE("summary CSV has a fixed header and stable numbers", "[io]") {
  pmoal::AgentSummary row;
  row.agent = "neuralcbp";
  row.mean_regret = 1.5;
  row.std_regret = 0.0;
  row.win_count = 2;
  row.mean_queries = 3.5;
  row.welch_p_vs_reference = 1.0;
  const std::string csv = pmoal::summary_csv({row});
  CHECK(csv ==
        "agent,mean_regret,std_regret,win_count,mean_queries,welch_p_vs_reference\n"
        "neuralcbp,1.5,0.0,2,3.5,1.0\n");
}

TEST_CASE("text files are written verbatim and parsed back", "[io]") {
  const auto path =
      (std::filesystem::temp_directory_path() / "io_round_trip.json").string();
  pmoal::write_text_file(path, "{\"a\": [1, 2.5]}\n");
  const Json j = pmoal::load_json_file(path);
  std::filesystem::remove(path);
  CHECK(j.at("a") == Json::parse("[1, 2.5]"));

  CHECK_THROWS(pmoal::load_json_file("/nonexistent/config.json"));
}
