#pragma once

// Drift-plus-penalty controller: every slot pick the action minimizing
//   V f(x) + sum_l Z_l g_l(x) + sum_k Q_k (y_k - b_k)
// over the current state's action table, then advance the network.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qnet/network.hpp"
#include "qnet/replication.hpp"
#include "qnet/sample_path.hpp"
#include "qnet/scenario.hpp"
#include "qnet/stability.hpp"

namespace qnet {

struct DppConfig {
  double V = 0.0;
  double C = 0.0;  // approximation slack; recorded only, the argmin is exact
  ServiceMode mode = ServiceMode::respect;
};

/// Scenario tables flattened for the hot loop.
class CompiledScenario {
 public:
  explicit CompiledScenario(const Scenario& s)
      : scenario_(&s), K_(s.n_queues), L_(s.n_constraints()), router_(s.n_queues, s.routing) {
    offset_.push_back(0);
    for (std::size_t w = 0; w < s.n_states(); ++w) {
      for (std::size_t a = 0; a < s.actions[w].size(); ++a) {
        const Action& act = s.actions[w][a];
        f_.push_back(s.cost(act.x));
        for (std::size_t l = 0; l < L_; ++l) g_.push_back(s.constraints[l](act.x));
        for (std::size_t k = 0; k < K_; ++k) net_.push_back(act.y[k] - act.b[k]);
      }
      offset_.push_back(f_.size());
    }
  }

  const Scenario& scenario() const { return *scenario_; }
  std::size_t n_queues() const { return K_; }
  std::size_t n_constraints() const { return L_; }
  std::size_t n_actions(std::size_t w) const { return offset_[w + 1] - offset_[w]; }
  double f(std::size_t w, std::size_t a) const { return f_[offset_[w] + a]; }
  std::span<const double> g(std::size_t w, std::size_t a) const { return {g_.data() + (offset_[w] + a) * L_, L_}; }
  const Router& router() const { return router_; }

  double score(std::size_t w, std::size_t a, std::span<const double> q, std::span<const double> z, double V) const {
    const std::size_t i = offset_[w] + a;
    double s = V * f_[i];
    const double* g = g_.data() + i * L_;
    for (std::size_t l = 0; l < L_; ++l) s += z[l] * g[l];
    const double* n = net_.data() + i * K_;
    for (std::size_t k = 0; k < K_; ++k) s += q[k] * n[k];
    return s;
  }

  /// Exact argmin; ties go to the lowest index.
  std::size_t select(std::size_t w, std::span<const double> q, std::span<const double> z, double V) const {
    std::size_t best = 0;
    double best_score = score(w, 0, q, z, V);
    for (std::size_t a = 1; a < n_actions(w); ++a) {
      const double s = score(w, a, q, z, V);
      if (s < best_score) {
        best_score = s;
        best = a;
      }
    }
    return best;
  }

 private:
  const Scenario* scenario_;
  std::size_t K_, L_;
  Router router_;
  std::vector<std::size_t> offset_;
  std::vector<double> f_, g_, net_;
};

inline double dpp_score(const Scenario& s, std::size_t omega, std::size_t alpha, const CompositeState& st, double V) {
  const ActionOutcome o = evaluate_action(s, omega, alpha);
  double v = V * o.f;
  for (std::size_t l = 0; l < o.g.size(); ++l) v += st.virtuals.at(l) * o.g[l];
  for (std::size_t k = 0; k < o.y.size(); ++k) v += st.queues.at(k) * (o.y[k] - o.b[k]);
  return v;
}

inline std::size_t dpp_select_action(const Scenario& s, std::size_t omega, const CompositeState& st,
                                     const DppConfig& cfg) {
  if (omega >= s.n_states()) throw std::out_of_range("omega index out of range");
  if (s.actions[omega].empty()) throw ScenarioError("state has no actions");
  std::size_t best = 0;
  double best_score = dpp_score(s, omega, 0, st, cfg.V);
  for (std::size_t a = 1; a < s.actions[omega].size(); ++a) {
    const double v = dpp_score(s, omega, a, st, cfg.V);
    if (v < best_score) {
      best_score = v;
      best = a;
    }
  }
  return best;
}

/// One slot as seen by an observer; state values are at the start of the slot.
struct SlotView {
  std::size_t t = 0;
  std::size_t omega = 0;
  std::size_t action = 0;
  std::span<const double> q;
  std::span<const double> z;
  std::span<const double> arrivals;
  std::span<const double> served;   // b_tilde
  std::span<const double> entered;  // y_tilde
  std::span<const double> x;
  double f = 0.0;
  std::span<const double> g;
};

struct DppMetrics {
  double avg_cost = 0.0;           // time average of f(x(t))
  std::vector<double> avg_g;       // time average of g_l(x(t))
  std::vector<double> avg_q;       // time average of Q_k(t)
  std::vector<double> avg_z;       // time average of Z_l(t)
  double avg_backlog = 0.0;        // time average of sum Q + sum Z
  std::vector<double> net_input;   // (1/H) sum (a + y_tilde - b_tilde) per queue
  CompositeState final_state;      // state after the last slot
};

/// Runs replication `replication` for `horizon` slots from the empty state.
/// `observer(const SlotView&)` is called once per slot.
template <class Observer>
DppMetrics run_dpp_path(const CompiledScenario& cs, const DppConfig& cfg, std::uint64_t seed, std::size_t horizon,
                        std::uint64_t replication, Observer&& observer) {
  if (horizon == 0) throw std::invalid_argument("horizon must be at least 1");
  if (!(cfg.V >= 0.0) || !(cfg.C >= 0.0)) throw std::invalid_argument("V and C must be non-negative");
  const Scenario& s = cs.scenario();
  const std::size_t K = cs.n_queues(), L = cs.n_constraints();
  ExogenousSampler sampler(s.chain, s.arrivals, initial_distribution(s.chain), substream_seed(seed, replication));
  std::vector<double> q(K, 0.0), z(L, 0.0), q0(K), z0(L), a(K), served(K), entered(K);
  DppMetrics m;
  m.avg_g.assign(L, 0.0);
  m.avg_q.assign(K, 0.0);
  m.avg_z.assign(L, 0.0);
  m.net_input.assign(K, 0.0);
  double sum_f = 0.0, sum_backlog = 0.0;
  for (std::size_t t = 0; t < horizon; ++t) {
    const std::size_t w = sampler.next_omega();
    sampler.next_arrivals(a);
    const std::size_t alpha = cs.select(w, q, z, cfg.V);
    const Action& act = s.action(w, alpha);
    const auto g = cs.g(w, alpha);
    q0 = q;
    z0 = z;
    network_step_inplace(q, z, act, g, a, cfg.mode, cs.router(), served, entered);
    const double f = cs.f(w, alpha);
    observer(SlotView{t, w, alpha, q0, z0, a, served, entered, act.x, f, g});
    sum_f += f;
    for (std::size_t l = 0; l < L; ++l) {
      m.avg_g[l] += g[l];
      m.avg_z[l] += z0[l];
      sum_backlog += z0[l];
    }
    for (std::size_t k = 0; k < K; ++k) {
      m.avg_q[k] += q0[k];
      sum_backlog += q0[k];
      m.net_input[k] += a[k] + entered[k] - served[k];
    }
  }
  const double H = static_cast<double>(horizon);
  m.avg_cost = sum_f / H;
  m.avg_backlog = sum_backlog / H;
  for (auto& v : m.avg_g) v /= H;
  for (auto& v : m.avg_q) v /= H;
  for (auto& v : m.avg_z) v /= H;
  for (auto& v : m.net_input) v /= H;
  m.final_state = CompositeState(q, z);
  return m;
}

inline DppMetrics run_dpp_path(const CompiledScenario& cs, const DppConfig& cfg, std::uint64_t seed,
                               std::size_t horizon, std::uint64_t replication = 0) {
  return run_dpp_path(cs, cfg, seed, horizon, replication, [](const SlotView&) {});
}

/// Names of the backlog series of a scenario: Q_1..Q_K then Z_1..Z_L.
inline std::vector<std::string> series_names(const Scenario& s) {
  std::vector<std::string> n;
  for (std::size_t k = 0; k < s.n_queues; ++k) n.push_back("Q_" + std::to_string(k + 1));
  for (std::size_t l = 0; l < s.n_constraints(); ++l) n.push_back("Z_" + std::to_string(l + 1));
  return n;
}

struct DppEnsemble {
  std::vector<std::string> names;
  std::vector<EnsembleSummary> series;  // one per name
  std::vector<DppMetrics> metrics;      // one per replication
};

/// `reps` independent closed-loop runs folded into per-series summaries.
/// Requires horizon >= 2 (checkpoints need two slots).
inline DppEnsemble run_dpp_ensemble(const Scenario& s, const DppConfig& cfg, std::uint64_t seed, std::size_t horizon,
                                    std::size_t reps, std::size_t threads = 1) {
  if (reps == 0) throw std::invalid_argument("reps must be at least 1");
  const CompiledScenario cs(s);
  DppEnsemble out;
  out.names = series_names(s);
  const std::size_t K = s.n_queues, S = out.names.size();
  for (std::size_t i = 0; i < S; ++i) out.series.emplace_back(horizon);
  const auto cps = out.series[0].checkpoints();

  struct RepResult {
    DppMetrics metrics;
    std::vector<PathRecord> records;
    std::vector<std::vector<double>> paths;
  };
  run_replications(
      reps, threads,
      [&](std::size_t r) {
        RepResult res;
        res.paths.assign(S, std::vector<double>(horizon));
        res.metrics = run_dpp_path(cs, cfg, seed, horizon, r, [&](const SlotView& v) {
          for (std::size_t k = 0; k < K; ++k) res.paths[k][v.t] = v.q[k];
          for (std::size_t l = 0; l < v.z.size(); ++l) res.paths[K + l][v.t] = v.z[l];
        });
        for (std::size_t i = 0; i < S; ++i) {
          std::optional<double> net;
          if (i < K) net = res.metrics.net_input[i];
          res.records.push_back(make_path_record(res.paths[i], cps, net));
        }
        return res;
      },
      [&](std::size_t, RepResult&& res) {
        for (std::size_t i = 0; i < S; ++i) out.series[i].add(std::move(res.records[i]), res.paths[i]);
        out.metrics.push_back(std::move(res.metrics));
      });
  return out;
}

}  // namespace qnet
