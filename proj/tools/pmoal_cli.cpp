// Command-line front end: game structure analysis, single seeded runs,
// multi-agent benchmarks, and a quick self-test suite.

#include <atomic>
#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "pmoal/agent.hpp"
#include "pmoal/baselines.hpp"
#include "pmoal/environment.hpp"
#include "pmoal/game.hpp"
#include "pmoal/harness.hpp"
#include "pmoal/io.hpp"
#include "pmoal/mlp.hpp"
#include "pmoal/stats.hpp"
#include "pmoal/structure.hpp"

namespace {

using namespace pmoal;

const std::vector<std::string> kAgentNames{"neuralcbp", "margin", "cesa", "random",
                                           "always_query"};

bool known_agent(const std::string& name) {
  for (const auto& k : kAgentNames)
    if (k == name) return true;
  return false;
}

/// Forwards to a NeuralCbpAgent while writing one trace line per decision.
struct TracedNeuralCbp {
  NeuralCbpAgent* inner;
  int expert;
  std::vector<Json>* lines;

  const Game& game() const { return inner->game(); }
  const char* name() const { return inner->name(); }
  int decide(const Vec& x) {
    RoundDecision d = inner->decide(x);
    lines->push_back(decision_to_json(d, d.action == expert));
    return d.action;
  }
  void observe(const Vec& x, int action, Symbol h) { inner->observe(x, action, h); }
  int predict_class(const Vec& x) const { return inner->predict_class(x); }
};

long long agent_fallback_rounds(const TracedNeuralCbp& t) {
  return t.inner->fallback_rounds();
}

RunRecord run_one(const std::string& agent_name, const EnvSpec& env_spec,
                  const StructureReport& report, const Json& agent_cfg_json,
                  const Json& baseline_cfg_json, long long horizon, std::uint64_t seed,
                  std::vector<Json>* trace_lines) {
  StreamEnv env = build_env(env_spec, horizon, seed);
  const int d = env.n_features();
  if (agent_name == "neuralcbp") {
    const AgentConfig cfg = agent_config_from_json(agent_cfg_json);
    NeuralCbpAgent agent(env.game(), report, d, cfg, seed);
    if (trace_lines) {
      TracedNeuralCbp traced{&agent, env.game().expert_action(), trace_lines};
      return run_episode(traced, env, horizon, seed);
    }
    return run_episode(agent, env, horizon, seed);
  }
  if (trace_lines) throw std::runtime_error("--trace is only supported for neuralcbp");
  const BaselineConfig cfg = baseline_config_from_json(baseline_cfg_json);
  BaselineAgent agent = make_baseline(agent_name, env.game(), d, cfg, seed);
  RunRecord rec;
  std::visit([&](auto& a) { rec = run_episode(a, env, horizon, seed); }, agent);
  return rec;
}

int cmd_analyze(const std::string& game_path, const std::string& out_path) {
  const Game g = game_from_json(load_json_file(game_path));
  const StructureReport report = analyze_game(g);
  const std::string text = report_to_json(g, report).dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    write_text_file(out_path, text);
  return 0;
}

int cmd_run(const std::string& agent, const std::string& env_path,
            const std::string& config_path, long long horizon, std::uint64_t seed,
            const std::string& out_path, const std::string& trace_path) {
  if (!known_agent(agent)) throw std::runtime_error("unknown agent: " + agent);
  if (horizon < 1) throw std::runtime_error("horizon must be >= 1");
  const EnvSpec env_spec = env_spec_from_json(load_json_file(env_path));
  Json agent_cfg = Json::object(), baseline_cfg = Json::object();
  if (!config_path.empty()) {
    const Json cfg = load_json_file(config_path);
    if (cfg.contains("agent_config")) agent_cfg = cfg.at("agent_config");
    if (cfg.contains("baseline_config")) baseline_cfg = cfg.at("baseline_config");
  }
  const Game g = game_for_env(env_spec);
  const StructureReport report = analyze_game(g);
  std::vector<Json> trace_lines;
  RunRecord rec = run_one(agent, env_spec, report, agent_cfg, baseline_cfg, horizon, seed,
                          trace_path.empty() ? nullptr : &trace_lines);
  const std::string text = record_to_json(rec).dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    write_text_file(out_path, text);
  if (!trace_path.empty()) {
    std::ostringstream out;
    for (const auto& line : trace_lines) out << line.dump() << '\n';
    write_text_file(trace_path, out.str());
  }
  return 0;
}

int cmd_bench(const std::string& config_path) {
  const BenchConfig cfg = bench_config_from_json(load_json_file(config_path));
  for (const auto& a : cfg.agents)
    if (!known_agent(a)) throw std::runtime_error("unknown agent: " + a);
  bool ref_listed = false;
  for (const auto& a : cfg.agents) ref_listed |= (a == cfg.reference);
  if (!ref_listed) throw std::runtime_error("reference agent is not in the agents list");

  const Game g = game_for_env(cfg.env);
  const StructureReport report = analyze_game(g);

  struct Task {
    std::string agent;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const auto& a : cfg.agents)
    for (std::uint64_t s : cfg.seeds) tasks.push_back({a, s});

  std::vector<RunRecord> records(tasks.size());
  std::vector<std::string> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  const int n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), tasks.size());
  auto worker = [&]() {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= tasks.size()) return;
      try {
        records[k] = run_one(tasks[k].agent, cfg.env, report, cfg.agent_config,
                             cfg.baseline_config, cfg.horizon, tasks[k].seed, nullptr);
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    }
  };
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (std::size_t k = 0; k < tasks.size(); ++k)
    if (!errors[k].empty())
      throw std::runtime_error("run failed (agent=" + tasks[k].agent + ", seed=" +
                               std::to_string(tasks[k].seed) + "): " + errors[k]);

  // task order is agent-major and seed-minor, so output order is deterministic
  std::ostringstream lines;
  for (const auto& rec : records) lines << record_to_json(rec).dump() << '\n';
  if (!cfg.out_records.empty()) write_text_file(cfg.out_records, lines.str());

  const std::vector<AgentSummary> summary = compute_metrics(records, cfg.reference);
  const std::string csv = summary_csv(summary);
  if (!cfg.out_summary.empty()) write_text_file(cfg.out_summary, csv);
  std::cout << csv;
  return 0;
}

// ------------------------------------------------------------------ selftest

bool check(bool ok, const std::string& label, int& failures) {
  std::cout << (ok ? "[PASS] " : "[FAIL] ") << label << "\n";
  if (!ok) ++failures;
  return ok;
}

bool close_to(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

int cmd_selftest() {
  int failures = 0;

  // structure pipeline on the two-class query game with unit costs
  {
    const Game g = make_label_efficient(uniform_cost_spec(2));
    const StructureReport r = analyze_game(g);
    const bool pareto_ok = r.pareto == std::vector<int>{0, 1};
    const bool dominated_ok =
        r.classification.size() == 3 && r.classification[2] == ActionClass::dominated;
    const bool neighbors_ok = r.neighbors == std::vector<PairKey>{{0, 1}};
    bool sets_ok = false, vec_ok = false, w_ok = false;
    if (neighbors_ok) {
      const PairKey p{0, 1};
      sets_ok = r.neighborhood_sets.at(p) == std::vector<int>{0, 1} &&
                r.observer_sets.at(p) == std::vector<int>{2};
      const Vec& v = r.observer_vectors.at(p).at(2);
      vec_ok = v.size() == 2 && close_to(v[0], -1.0, 1e-9) && close_to(v[1], 1.0, 1e-9);
      w_ok = r.weights.size() == 3 && close_to(r.weights[0], 0.0, 1e-12) &&
             close_to(r.weights[1], 0.0, 1e-12) && close_to(r.weights[2], 1.0, 1e-9);
    }
    check(pareto_ok && dominated_ok && neighbors_ok && sets_ok && vec_ok && w_ok,
          "query-game structure (pareto/neighbors/observers/weights)", failures);
  }

  // observer residuals on a batch of random observable games
  {
    Rng rng(20240817);
    bool ok = true;
    for (int trial = 0; trial < 20 && ok; ++trial) {
      const int m = 2 + static_cast<int>(rng.uniform_int(2));
      CostSpec spec = uniform_cost_spec(m, 0.25 + 0.5 * rng.uniform());
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          if (i != j) spec.error_costs(i, j) = 0.2 + 0.8 * rng.uniform();
      const Game g = make_label_efficient(spec);
      const StructureReport r = analyze_game(g);
      for (const auto& [p, vs] : r.observer_vectors) {
        // rebuild the pair's cost difference from the observer decomposition
        Vec recon(g.n_outcomes(), 0.0);
        for (const auto& [a, v] : vs) {
          const Matrix& s = g.signal_matrix(a);
          for (std::size_t u = 0; u < s.rows(); ++u)
            for (std::size_t y = 0; y < s.cols(); ++y) recon[y] += v[u] * s(u, y);
        }
        for (int y = 0; y < g.n_outcomes(); ++y)
          ok = ok && close_to(recon[y], g.cost_diff(p.first, p.second)[y], 1e-8);
      }
    }
    check(ok, "observer decompositions reconstruct cost differences", failures);
  }

  // rank-one inverse updates match direct inversion
  {
    Rng rng(7);
    const std::size_t dim = 8;
    Matrix gram = Matrix::identity(dim, 1.0);
    Matrix gram_inv = Matrix::identity(dim, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 60; ++k) {
      Vec phi(dim);
      for (auto& x : phi) x = rng.normal();
      for (std::size_t a = 0; a < dim; ++a)
        for (std::size_t b = 0; b < dim; ++b) gram(a, b) += phi[a] * phi[b];
      sherman_morrison_update(gram_inv, phi);
      const Matrix direct = invert(gram);
      for (std::size_t a = 0; a < dim; ++a)
        for (std::size_t b = 0; b < dim; ++b)
          worst = std::max(worst, std::fabs(direct(a, b) - gram_inv(a, b)));
    }
    check(worst <= 1e-8, "rank-one gram updates agree with direct inversion", failures);
  }

  // analytic gradients agree with central finite differences
  {
    Rng rng(99);
    Mlp net({3, 6, 2}, rng);
    std::vector<Vec> xs;
    std::vector<Vec> ys;
    for (int k = 0; k < 5; ++k) {
      Vec x(3), y(2);
      for (auto& v : x) v = rng.normal();
      for (auto& v : y) v = rng.uniform();
      xs.push_back(x);
      ys.push_back(y);
    }
    std::vector<Matrix> grads;
    batch_loss_and_gradient(net, xs, ys, grads);
    double worst_rel = 0.0;
    const double h = 1e-5;
    for (std::size_t l = 0; l < net.n_layers(); ++l) {
      Matrix& w = net.weights()[l];
      for (std::size_t idx = 0; idx < w.data().size(); ++idx) {
        const double keep = w.data()[idx];
        std::vector<Matrix> scratch;
        w.data()[idx] = keep + h;
        const double up = batch_loss_and_gradient(net, xs, ys, scratch);
        w.data()[idx] = keep - h;
        const double dn = batch_loss_and_gradient(net, xs, ys, scratch);
        w.data()[idx] = keep;
        const double fd = (up - dn) / (2.0 * h);
        const double denom = std::max(1e-8, std::fabs(fd));
        worst_rel = std::max(worst_rel, std::fabs(grads[l].data()[idx] - fd) / denom);
      }
    }
    check(worst_rel <= 1e-4, "network gradients agree with finite differences", failures);
  }

  // frozen statistics values
  {
    const Vec x{3.1, 2.9, 3.4, 3.0, 2.8};
    const Vec y{3.6, 3.8, 3.3, 3.9, 4.1};
    const WelchResult w = welch_one_sided(x, y);
    const bool welch_ok = close_to(w.t, -4.096440151864568, 1e-9) &&
                          close_to(w.p, 0.002015574982864, 1e-9);
    const double f1 = weighted_f1({0, 0, 1}, {0, 1, 1}, 2);
    check(welch_ok && close_to(f1, 2.0 / 3.0, 1e-12),
          "statistics primitives match frozen values", failures);
  }

  // end-to-end determinism of a short seeded run
  {
    EnvSpec spec;
    spec.kind = "gaussian";
    spec.gauss = GaussianSpec{};
    spec.n_classes = 2;
    const Game g = game_for_env(spec);
    const StructureReport report = analyze_game(g);
    Json agent_cfg = {{"nets", {{"hidden", 8}, {"epochs1", 2}, {"epochs2", 2}}}};
    const RunRecord a =
        run_one("neuralcbp", spec, report, agent_cfg, Json::object(), 40, 11, nullptr);
    const RunRecord b =
        run_one("neuralcbp", spec, report, agent_cfg, Json::object(), 40, 11, nullptr);
    check(record_to_json(a).dump() == record_to_json(b).dump(),
          "repeated seeded runs serialize identically", failures);
  }

  std::cout << (failures == 0 ? "selftest: all checks passed\n"
                              : "selftest: " + std::to_string(failures) + " check(s) failed\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"partial-monitoring / online active-learning toolkit"};
  app.require_subcommand(1);

  std::string game_path, analyze_out;
  CLI::App* analyze = app.add_subcommand("analyze", "print a game's structure report");
  analyze->add_option("game", game_path, "game or cost-spec JSON file")->required();
  analyze->add_option("--out", analyze_out, "write the report here instead of stdout");

  std::string agent, env_path, config_path, run_out, trace_path;
  long long horizon = 0;
  std::uint64_t seed = 1;
  CLI::App* run = app.add_subcommand("run", "run one agent for one seed");
  run->add_option("--agent", agent, "neuralcbp | margin | cesa | random | always_query")
      ->required();
  run->add_option("--env", env_path, "environment spec JSON file")->required();
  run->add_option("--horizon", horizon, "number of rounds")->required();
  run->add_option("--seed", seed, "master seed (64-bit unsigned)")->required();
  run->add_option("--config", config_path, "agent/baseline config JSON file");
  run->add_option("--out", run_out, "write the run record here instead of stdout");
  run->add_option("--trace", trace_path, "write per-round decision JSON lines here");

  std::string bench_config;
  CLI::App* bench = app.add_subcommand("bench", "run a seed grid across agents");
  bench->add_option("--config", bench_config, "benchmark config JSON file")->required();

  CLI::App* selftest = app.add_subcommand("selftest", "run quick built-in checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (analyze->parsed()) return cmd_analyze(game_path, analyze_out);
    if (run->parsed())
      return cmd_run(agent, env_path, config_path, horizon, seed, run_out, trace_path);
    if (bench->parsed()) return cmd_bench(bench_config);
    if (selftest->parsed()) return cmd_selftest();
  } catch (const pmoal::UnobservableGameError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
