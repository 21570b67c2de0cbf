#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pmoal/agent.hpp"
#include "pmoal/environment.hpp"
#include "pmoal/game.hpp"
#include "pmoal/stats.hpp"

namespace pmoal {

struct F1Snapshot {
  long long budget = 0;  // query budget that was just reached
  long long round = 0;   // round at which it was reached
  double f1 = 0.0;       // weighted F1 on the held-out split at that point
};

/// Everything recorded about one seeded episode. wall_clock_seconds is
/// in-memory diagnostics only and deliberately never serialized, so that
/// identical runs produce byte-identical artifacts.
struct RunRecord {
  std::string agent;
  std::uint64_t seed = 0;
  long long horizon = 0;
  Vec regret_increments;               // one per round
  double final_regret = 0.0;
  std::vector<long long> query_rounds; // 1-based rounds that paid the query cost
  Matrix confusion;                    // predicted x true, over prediction rounds
  std::vector<F1Snapshot> f1_snapshots;
  long long fallback_rounds = 0;
  double wall_clock_seconds = 0.0;
};

inline const std::vector<long long>& f1_budget_grid() {
  static const std::vector<long long> grid{10,  25,  50,   100,  150,  250,  300, 400,
                                           500, 750, 1000, 2500, 5000, 7500, 9000};
  return grid;
}

// Agents expose slightly different surfaces; these hooks normalize them.
template <class Agent>
int agent_action(Agent& agent, const Vec& x) {
  return agent.decide(x);
}
inline int agent_action(NeuralCbpAgent& agent, const Vec& x) {
  return agent.decide(x).action;
}

template <class Agent>
long long agent_fallback_rounds(const Agent&) {
  return 0;
}
inline long long agent_fallback_rounds(const NeuralCbpAgent& agent) {
  return agent.fallback_rounds();
}

/// Weighted F1 of the agent's class predictions on the env's held-out split.
template <class Agent>
double evaluate_weighted_f1(const Agent& agent, const StreamEnv& env) {
  const auto& xs = env.test_features();
  const auto& ys = env.test_labels();
  if (xs.empty()) return 0.0;
  std::vector<int> pred(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) pred[k] = agent.predict_class(xs[k]) - 1;
  return weighted_f1(pred, ys, env.game().n_outcomes());
}

/// Drive one agent/environment pair for `horizon` rounds and record the run.
/// The agent only ever sees contexts and feedback symbols; outcome peeking
/// stays inside the harness (confusion counts use it for evaluation).
template <class Agent>
RunRecord run_episode(Agent& agent, StreamEnv& env, long long horizon,
                      std::uint64_t seed) {
  if (!(agent.game() == env.game()))
    throw std::invalid_argument("run_episode: agent and environment play different games");
  if (env.horizon() < horizon)
    throw std::invalid_argument("run_episode: environment horizon shorter than requested run");
  const auto t0 = std::chrono::steady_clock::now();

  const Game& g = env.game();
  const int m = g.n_outcomes();
  const int expert = g.expert_action();
  RunRecord rec;
  rec.agent = agent.name();
  rec.seed = seed;
  rec.horizon = horizon;
  rec.regret_increments.reserve(static_cast<std::size_t>(horizon));
  rec.confusion = Matrix(static_cast<std::size_t>(m), static_cast<std::size_t>(m));

  std::size_t next_budget = 0;
  const auto& grid = f1_budget_grid();
  while (next_budget < grid.size() && grid[next_budget] > horizon) ++next_budget;

  for (long long t = 1; t <= horizon; ++t) {
    const Vec x = env.step();
    const int y = env.current_outcome();
    const int action = agent_action(agent, x);
    auto [symbol, inc] = env.feedback(action);
    agent.observe(x, action, symbol);
    rec.regret_increments.push_back(inc);
    rec.final_regret += inc;
    if (action == expert) {
      rec.query_rounds.push_back(t);
      if (next_budget < grid.size() &&
          static_cast<long long>(rec.query_rounds.size()) == grid[next_budget]) {
        F1Snapshot snap;
        snap.budget = grid[next_budget];
        snap.round = t;
        snap.f1 = evaluate_weighted_f1(agent, env);
        rec.f1_snapshots.push_back(snap);
        do {
          ++next_budget;
        } while (next_budget < grid.size() && grid[next_budget] > horizon);
      }
    } else if (action < m) {
      rec.confusion(static_cast<std::size_t>(action), static_cast<std::size_t>(y)) += 1.0;
    }
  }
  rec.fallback_rounds = agent_fallback_rounds(agent);
  rec.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

struct AgentSummary {
  std::string agent;
  double mean_regret = 0.0;
  double std_regret = 0.0;
  int win_count = 0;
  double mean_queries = 0.0;
  double welch_p_vs_reference = 1.0;
};

/// Aggregate per-agent metrics over seed-aligned runs. Wins are counted per
/// seed for every agent within 1e-9 of the minimum final regret; Welch
/// p-values test whether the reference agent's regret is lower.
inline std::vector<AgentSummary> compute_metrics(const std::vector<RunRecord>& records,
                                                 const std::string& reference) {
  if (records.empty()) throw std::invalid_argument("compute_metrics: no records");
  std::vector<std::string> order;
  std::map<std::string, std::vector<const RunRecord*>> groups;
  for (const auto& r : records) {
    if (!groups.count(r.agent)) order.push_back(r.agent);
    groups[r.agent].push_back(&r);
  }
  if (!groups.count(reference))
    throw std::invalid_argument("compute_metrics: reference agent '" + reference +
                                "' has no records");
  for (const auto& [name, rs] : groups)
    if (rs.size() < 2)
      throw std::invalid_argument("compute_metrics: agent '" + name +
                                  "' needs at least 2 runs");

  // Per-seed winners; ties within 1e-9 of the minimum all count as wins.
  std::map<std::string, int> wins;
  for (const RunRecord* ref : groups[reference]) {
    const std::uint64_t seed = ref->seed;
    std::map<std::string, double> per_agent;
    for (const auto& [name, rs] : groups) {
      const RunRecord* hit = nullptr;
      for (const RunRecord* r : rs)
        if (r->seed == seed) hit = r;
      if (!hit)
        throw std::invalid_argument("compute_metrics: seed sets differ across agents");
      per_agent[name] = hit->final_regret;
    }
    double best = per_agent.begin()->second;
    for (const auto& [name, v] : per_agent) best = std::min(best, v);
    for (const auto& [name, v] : per_agent)
      if (v <= best + 1e-9) ++wins[name];
  }

  Vec ref_regrets;
  for (const RunRecord* r : groups[reference]) ref_regrets.push_back(r->final_regret);

  std::vector<AgentSummary> out;
  for (const auto& name : order) {
    const auto& rs = groups[name];
    AgentSummary s;
    s.agent = name;
    Vec regrets, queries;
    for (const RunRecord* r : rs) {
      regrets.push_back(r->final_regret);
      queries.push_back(static_cast<double>(r->query_rounds.size()));
    }
    s.mean_regret = mean_of(regrets);
    s.std_regret = sample_std(regrets);
    s.mean_queries = mean_of(queries);
    s.win_count = wins[name];
    s.welch_p_vs_reference =
        name == reference ? 1.0 : welch_one_sided(ref_regrets, regrets).p;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace pmoal
