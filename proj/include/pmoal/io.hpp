#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pmoal/agent.hpp"
#include "pmoal/baselines.hpp"
#include "pmoal/environment.hpp"
#include "pmoal/game.hpp"
#include "pmoal/harness.hpp"
#include "pmoal/structure.hpp"

namespace pmoal {

using Json = nlohmann::json;

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw std::runtime_error("invalid JSON in " + path + ": " + e.what());
  }
  return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);  // binary keeps LF endings everywhere
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << text;
}

/// Render a double exactly as it would appear in JSON output (shortest
/// round-trip form), so CSV and JSON artifacts agree byte for byte.
inline std::string number_repr(double v) { return Json(v).dump(); }

// ---------------------------------------------------------------- matrices

inline Matrix matrix_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw std::runtime_error(what + ": expected a non-empty array of arrays");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].size();
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      throw std::runtime_error(what + ": ragged rows");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number())
        throw std::runtime_error(what + ": non-numeric entry");
      m(r, c) = j[r][c].get<double>();
    }
  }
  return m;
}

inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

// ------------------------------------------------------------------- games

inline CostSpec cost_spec_from_json(const Json& j) {
  CostSpec spec;
  spec.n_classes = j.at("n_classes").get<int>();
  spec.query_cost = j.value("query_cost", 1.0);
  if (j.contains("error_costs")) {
    spec.error_costs = matrix_from_json(j.at("error_costs"), "error_costs");
  } else {
    spec = uniform_cost_spec(spec.n_classes, spec.query_cost);
  }
  spec.validate();
  return spec;
}

/// Accepts either a full game {"cost": [[...]], "feedback": [["s",...],...]}
/// or a cost spec {"n_classes", "query_cost", "error_costs"} which expands to
/// the label-efficient prediction game.
inline Game game_from_json(const Json& j) {
  if (!j.is_object()) throw std::runtime_error("game: expected a JSON object");
  if (j.contains("cost") && j.contains("feedback")) {
    Matrix cost = matrix_from_json(j.at("cost"), "cost");
    const Json& fb = j.at("feedback");
    if (!fb.is_array() || fb.size() != cost.rows())
      throw std::runtime_error("game: feedback must have one row per action");
    std::vector<std::vector<std::string>> names;
    for (const auto& row : fb) {
      if (!row.is_array() || row.size() != cost.cols())
        throw std::runtime_error("game: feedback rows must have one entry per outcome");
      std::vector<std::string> r;
      for (const auto& cell : row) {
        if (!cell.is_string()) throw std::runtime_error("game: feedback entries must be strings");
        r.push_back(cell.get<std::string>());
      }
      names.push_back(std::move(r));
    }
    return build_game(cost, names);
  }
  if (j.contains("n_classes")) return make_label_efficient(cost_spec_from_json(j));
  throw std::runtime_error(
      "game: need either {cost, feedback} or {n_classes, query_cost, error_costs}");
}

inline Json game_to_json(const Game& g) {
  Json j;
  j["cost"] = matrix_to_json(g.cost());
  Json fb = Json::array();
  for (int a = 0; a < g.n_actions(); ++a) {
    Json row = Json::array();
    for (int y = 0; y < g.n_outcomes(); ++y) row.push_back(g.symbol_name(g.symbol_at(a, y)));
    fb.push_back(std::move(row));
  }
  j["feedback"] = std::move(fb);
  return j;
}

// -------------------------------------------------------- structure report

namespace detail {
inline std::string pair_key_string(const PairKey& p) {
  return std::to_string(p.first + 1) + "," + std::to_string(p.second + 1);
}
inline Json one_based(const std::vector<int>& xs) {
  Json out = Json::array();
  for (int x : xs) out.push_back(x + 1);
  return out;
}
}  // namespace detail

/// External report uses 1-based action indices everywhere.
inline Json report_to_json(const Game& g, const StructureReport& r) {
  Json j;
  j["n_actions"] = g.n_actions();
  j["n_outcomes"] = g.n_outcomes();
  Json cls = Json::array();
  std::vector<int> dominated, degenerate;
  for (int a = 0; a < g.n_actions(); ++a) {
    cls.push_back(to_string(r.classification[static_cast<std::size_t>(a)]));
    if (r.classification[static_cast<std::size_t>(a)] == ActionClass::dominated)
      dominated.push_back(a);
    if (r.classification[static_cast<std::size_t>(a)] == ActionClass::degenerate)
      degenerate.push_back(a);
  }
  j["classification"] = std::move(cls);
  j["pareto"] = detail::one_based(r.pareto);
  j["dominated"] = detail::one_based(dominated);
  j["degenerate"] = detail::one_based(degenerate);
  j["informative"] = detail::one_based(g.informative_actions());
  Json sigma = Json::array();
  for (int a = 0; a < g.n_actions(); ++a) sigma.push_back(g.n_symbols(a));
  j["sigma"] = std::move(sigma);
  j["sigma_total"] = g.sigma_total();
  Json nb = Json::array();
  for (const auto& p : r.neighbors) nb.push_back(Json::array({p.first + 1, p.second + 1}));
  j["neighbors"] = std::move(nb);
  Json nsets = Json::object(), osets = Json::object(), ovecs = Json::object();
  for (const auto& [p, s] : r.neighborhood_sets) nsets[detail::pair_key_string(p)] = detail::one_based(s);
  for (const auto& [p, s] : r.observer_sets) osets[detail::pair_key_string(p)] = detail::one_based(s);
  for (const auto& [p, vs] : r.observer_vectors) {
    Json per_action = Json::object();
    for (const auto& [a, v] : vs) per_action[std::to_string(a + 1)] = v;
    ovecs[detail::pair_key_string(p)] = std::move(per_action);
  }
  j["neighborhood_sets"] = std::move(nsets);
  j["observer_sets"] = std::move(osets);
  j["observer_vectors"] = std::move(ovecs);
  j["weights"] = r.weights;
  j["weights_euclidean"] = r.weights_two;
  return j;
}

// ------------------------------------------------------------- run records

/// Wall-clock time is intentionally omitted: identical runs must serialize
/// byte-identically.
inline Json record_to_json(const RunRecord& r) {
  Json j;
  j["agent"] = r.agent;
  j["seed"] = r.seed;
  j["horizon"] = r.horizon;
  j["final_regret"] = r.final_regret;
  j["regret_increments"] = r.regret_increments;
  j["query_rounds"] = r.query_rounds;
  j["query_count"] = r.query_rounds.size();
  j["confusion"] = matrix_to_json(r.confusion);  // row = predicted class, col = true class
  if (r.confusion.rows() == 2) {                 // class 2 treated as the positive label
    j["tp"] = r.confusion(1, 1);
    j["fp"] = r.confusion(1, 0);
    j["fn"] = r.confusion(0, 1);
    j["tn"] = r.confusion(0, 0);
  }
  Json snaps = Json::array();
  for (const auto& s : r.f1_snapshots)
    snaps.push_back(Json{{"budget", s.budget}, {"round", s.round}, {"f1", s.f1}});
  j["f1_snapshots"] = std::move(snaps);
  j["fallback_rounds"] = r.fallback_rounds;
  return j;
}

/// One decision-trace line per round: the chosen action, the sizes of each
/// selection stage, and the pairwise estimate/threshold values.
inline Json decision_to_json(const RoundDecision& d, bool queried) {
  Json j;
  j["t"] = d.t;
  j["action"] = d.action + 1;
  j["forced"] = d.forced;
  j["fallback"] = d.fallback;
  j["queried"] = queried;
  j["n_confident_pairs"] = d.confident_pairs.size();
  j["n_plausible_actions"] = d.plausible_actions.size();
  j["n_plausible_pairs"] = d.plausible_pairs.size();
  j["n_neighborhood_actions"] = d.neighborhood_actions.size();
  j["n_observer_actions"] = d.observer_actions.size();
  j["n_underplayed_actions"] = d.underplayed_actions.size();
  j["n_candidate_actions"] = d.candidate_actions.size();
  Json pairs = Json::object();
  for (const auto& [p, dz] : d.pair_estimates)
    pairs[detail::pair_key_string(p)] = Json{{"delta", dz.first}, {"z", dz.second}};
  j["pairs"] = std::move(pairs);
  return j;
}

// ----------------------------------------------------------- environments

struct EnvSpec {
  std::string kind;  // "gaussian" or "csv"
  GaussianSpec gauss;
  std::string csv_path;
  std::string label_column;
  int n_classes = 2;
  double test_frac = 0.15;
  bool with_replacement = false;
  Json game;  // optional game or cost-spec override; null = uniform costs
};

inline EnvSpec env_spec_from_json(const Json& j) {
  if (!j.is_object()) throw std::runtime_error("env: expected a JSON object");
  EnvSpec spec;
  spec.kind = j.at("kind").get<std::string>();
  spec.test_frac = j.value("test_frac", 0.15);
  spec.with_replacement = j.value("with_replacement", false);
  if (j.contains("game")) spec.game = j.at("game");
  if (spec.kind == "gaussian") {
    spec.gauss.n_classes = j.value("M", 2);
    spec.gauss.n_features = j.value("d", 2);
    spec.gauss.separation = j.value("sep", 3.0);
    spec.gauss.n_rows = j.value("n_rows", static_cast<long long>(0));
    spec.n_classes = spec.gauss.n_classes;
  } else if (spec.kind == "csv") {
    spec.csv_path = j.at("path").get<std::string>();
    spec.label_column = j.at("label_column").get<std::string>();
    spec.n_classes = j.at("n_classes").get<int>();
  } else {
    throw std::runtime_error("env: kind must be \"gaussian\" or \"csv\"");
  }
  return spec;
}

inline Game game_for_env(const EnvSpec& spec) {
  if (!spec.game.is_null()) return game_from_json(spec.game);
  return make_label_efficient(uniform_cost_spec(spec.n_classes));
}

inline StreamEnv build_env(const EnvSpec& spec, long long horizon, std::uint64_t seed) {
  Game g = game_for_env(spec);
  if (g.n_outcomes() != spec.n_classes)
    throw std::runtime_error("env: game outcome count does not match n_classes");
  std::pair<Matrix, std::vector<int>> data;
  if (spec.kind == "gaussian") {
    data = generate_gaussian_data(spec.gauss, spec.test_frac, horizon, seed);
  } else {
    data = load_csv_data(spec.csv_path, spec.label_column, spec.n_classes);
  }
  return StreamEnv(std::move(g), std::move(data.first), std::move(data.second),
                   spec.test_frac, horizon, seed, spec.with_replacement);
}

// ----------------------------------------------------------------- configs

inline EENetsConfig eenets_config_from_json(const Json& j, EENetsConfig base = {}) {
  base.hidden = j.value("hidden", base.hidden);
  base.depth = j.value("depth", base.depth);
  base.lr1 = j.value("lr1", base.lr1);
  base.lr2 = j.value("lr2", base.lr2);
  base.epochs1 = j.value("epochs1", base.epochs1);
  base.epochs2 = j.value("epochs2", base.epochs2);
  base.batch_size = j.value("batch_size", base.batch_size);
  base.block = j.value("block", base.block);
  return base;
}

inline AgentConfig agent_config_from_json(const Json& j, AgentConfig base = {}) {
  if (j.contains("nets")) base.nets = eenets_config_from_json(j.at("nets"), base.nets);
  base.lambda = j.value("lambda", base.lambda);
  base.alpha = j.value("alpha", base.alpha);
  base.tol = j.value("tol", base.tol);
  if (j.contains("norm")) {
    const std::string n = j.at("norm").get<std::string>();
    if (n == "max") base.norm = AgentConfig::Norm::max;
    else if (n == "euclidean") base.norm = AgentConfig::Norm::euclidean;
    else throw std::runtime_error("agent config: norm must be \"max\" or \"euclidean\"");
  }
  base.every_round_until = j.value("every_round_until", base.every_round_until);
  base.mid_interval = j.value("mid_interval", base.mid_interval);
  base.mid_until = j.value("mid_until", base.mid_until);
  base.late_interval = j.value("late_interval", base.late_interval);
  return base;
}

inline BaselineConfig baseline_config_from_json(const Json& j, BaselineConfig base = {}) {
  base.hidden = j.value("hidden", base.hidden);
  base.depth = j.value("depth", base.depth);
  base.lr = j.value("lr", base.lr);
  base.epochs = j.value("epochs", base.epochs);
  base.batch_size = j.value("batch_size", base.batch_size);
  base.margin_threshold = j.value("margin_threshold", base.margin_threshold);
  base.cesa_b = j.value("cesa_b", base.cesa_b);
  base.random_query_prob = j.value("random_query_prob", base.random_query_prob);
  base.every_round_until = j.value("every_round_until", base.every_round_until);
  base.mid_interval = j.value("mid_interval", base.mid_interval);
  base.mid_until = j.value("mid_until", base.mid_until);
  base.late_interval = j.value("late_interval", base.late_interval);
  return base;
}

// ------------------------------------------------------------------- bench

struct BenchConfig {
  std::vector<std::string> agents;
  std::vector<std::uint64_t> seeds;
  long long horizon = 0;
  EnvSpec env;
  std::string reference = "neuralcbp";
  Json agent_config = Json::object();
  Json baseline_config = Json::object();
  std::string out_records;
  std::string out_summary;
  int threads = 1;
};

inline BenchConfig bench_config_from_json(const Json& j) {
  BenchConfig cfg;
  if (!j.is_object()) throw std::runtime_error("bench config: expected a JSON object");
  for (const auto& a : j.at("agents")) cfg.agents.push_back(a.get<std::string>());
  if (cfg.agents.empty()) throw std::runtime_error("bench config: agents must be non-empty");
  if (j.contains("seeds")) {
    for (const auto& s : j.at("seeds")) cfg.seeds.push_back(s.get<std::uint64_t>());
  } else {
    const auto n = j.at("n_seeds").get<int>();
    const auto first = j.value("first_seed", static_cast<std::uint64_t>(1));
    for (int i = 0; i < n; ++i) cfg.seeds.push_back(first + static_cast<std::uint64_t>(i));
  }
  if (cfg.seeds.empty()) throw std::runtime_error("bench config: need at least one seed");
  cfg.horizon = j.at("horizon").get<long long>();
  cfg.env = env_spec_from_json(j.at("env"));
  cfg.reference = j.value("reference", cfg.agents.front());
  if (j.contains("agent_config")) cfg.agent_config = j.at("agent_config");
  if (j.contains("baseline_config")) cfg.baseline_config = j.at("baseline_config");
  cfg.out_records = j.value("out_records", std::string{});
  cfg.out_summary = j.value("out_summary", std::string{});
  cfg.threads = j.value("threads", 1);
  if (cfg.threads < 1) throw std::runtime_error("bench config: threads must be >= 1");
  return cfg;
}

inline std::string summary_csv(const std::vector<AgentSummary>& rows) {
  std::ostringstream out;
  out << "agent,mean_regret,std_regret,win_count,mean_queries,welch_p_vs_reference\n";
  for (const auto& r : rows) {
    out << r.agent << ',' << number_repr(r.mean_regret) << ',' << number_repr(r.std_regret)
        << ',' << r.win_count << ',' << number_repr(r.mean_queries) << ','
        << number_repr(r.welch_p_vs_reference) << '\n';
  }
  return out.str();
}

}  // namespace pmoal
