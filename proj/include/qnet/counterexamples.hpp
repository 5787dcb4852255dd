#pragma once

// Three processes that separate the stability notions, with checks of the
// signature each one is known to have.
//
//   rate-not-mean   Q(t) = 4^t while t < T, then 0, with T geometric:
//                   Pr[T > t] = 2^-t. Every path empties, but E[Q(t)] = 2^t.
//   mean-not-rate   Q(0) = 0, Q(t) = t with probability 1/t independently.
//                   E[Q(t)] = 1, yet spikes of size t recur forever.
//   strong-not-rate deterministic, Q(t) = t when t is a power of two, else 0.
//                   Time average tends to 2, Q(2^n)/2^n = 1.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qnet/replication.hpp"
#include "qnet/rng.hpp"
#include "qnet/stability.hpp"

namespace qnet {

inline constexpr std::size_t kRateNotMeanMaxHorizon = 41;  // Q(40) = 2^80 is still exact

inline void check_counterexample_horizon(const std::string& name, std::size_t horizon) {
  if (name == "rate-not-mean") {
    if (horizon < 2 || horizon > kRateNotMeanMaxHorizon)
      throw std::invalid_argument("rate-not-mean horizon must lie in [2, 41] (values reach 4^t)");
  } else if (name == "mean-not-rate") {
    if (horizon < 11) throw std::invalid_argument("mean-not-rate horizon must be at least 11");
  } else if (name == "strong-not-rate") {
    const std::size_t n = horizon - 1;
    if (horizon < 3 || (n & (n - 1)) != 0)
      throw std::invalid_argument("strong-not-rate horizon must be a power of two plus one");
  } else {
    throw std::invalid_argument("unknown counterexample '" + name +
                                "' (expected rate-not-mean, mean-not-rate or strong-not-rate)");
  }
}

inline void cex_rate_not_mean_path(Xoshiro256& rng, std::span<double> q) {
  check_counterexample_horizon("rate-not-mean", q.size());
  std::size_t T = 1;
  while (rng.bernoulli(0.5)) ++T;
  for (std::size_t t = 0; t < q.size(); ++t) q[t] = t < T ? std::ldexp(1.0, static_cast<int>(2 * t)) : 0.0;
}

inline void cex_mean_not_rate_path(Xoshiro256& rng, std::span<double> q) {
  check_counterexample_horizon("mean-not-rate", q.size());
  q[0] = 0.0;
  for (std::size_t t = 1; t < q.size(); ++t) {
    const double td = static_cast<double>(t);
    q[t] = rng.uniform() < 1.0 / td ? td : 0.0;
  }
}

inline void cex_strong_not_rate_path(std::span<double> q) {
  check_counterexample_horizon("strong-not-rate", q.size());
  for (std::size_t t = 0; t < q.size(); ++t) q[t] = (t > 0 && (t & (t - 1)) == 0) ? static_cast<double>(t) : 0.0;
}

inline std::size_t default_counterexample_horizon(const std::string& name) {
  if (name == "rate-not-mean") return kRateNotMeanMaxHorizon;
  if (name == "mean-not-rate") return 201;
  if (name == "strong-not-rate") return (std::size_t{1} << 20) + 1;
  check_counterexample_horizon(name, 0);
  return 0;
}

/// Ensemble of `reps` paths (a single path for the deterministic example).
inline EnsembleSummary counterexample_ensemble(const std::string& name, std::uint64_t seed, std::size_t horizon,
                                               std::size_t reps, std::size_t threads = 1) {
  check_counterexample_horizon(name, horizon);
  if (reps == 0) throw std::invalid_argument("reps must be at least 1");
  EnsembleSummary ens(horizon);
  if (name == "strong-not-rate") {
    std::vector<double> q(horizon);
    cex_strong_not_rate_path(q);
    ens.add(q);
    return ens;
  }
  const auto cps = ens.checkpoints();
  run_replications(
      reps, threads,
      [&](std::size_t r) {
        Xoshiro256 rng(substream_seed(seed, r));
        std::vector<double> q(horizon);
        if (name == "rate-not-mean")
          cex_rate_not_mean_path(rng, q);
        else
          cex_mean_not_rate_path(rng, q);
        PathRecord rec = make_path_record(q, cps);
        return std::make_pair(std::move(rec), std::move(q));
      },
      [&](std::size_t, std::pair<PathRecord, std::vector<double>>&& out) {
        ens.add(std::move(out.first), out.second);
      });
  return ens;
}

struct SignatureCheck {
  std::string name;
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct CounterexampleReport {
  std::string name;
  std::vector<SignatureCheck> checks;
  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return !checks.empty();
  }
};

namespace detail {

inline SignatureCheck within(std::string name, double value, double expected, double tol) {
  return {std::move(name), value, expected, tol, std::abs(value - expected) <= tol};
}

}  // namespace detail

/// Thresholds applied to counterexample ensembles: their horizons are short by construction.
inline StabilityThresholds counterexample_thresholds() {
  StabilityThresholds th;
  th.min_horizon = 2;
  return th;
}

inline CounterexampleReport check_signature(const std::string& name, const EnsembleSummary& ens) {
  CounterexampleReport rep;
  rep.name = name;
  const std::size_t H = ens.horizon();
  const double R = static_cast<double>(ens.n_reps());
  if (name == "rate-not-mean") {
    if (H > 6) {
      const double m = ens.ensemble_mean(6) / 6.0;
      rep.checks.push_back(detail::within("mean_Q6_over_6", m, 64.0 / 6.0, 0.1 * 64.0 / 6.0));
    }
    const std::size_t last = H - 1;
    const std::size_t idx = ens.checkpoint_index(last);
    double zeros = 0.0;
    for (const auto& p : ens.paths()) zeros += p.checkpoint_values[idx] == 0.0;
    const double frac = zeros / R;
    // Pr[Q(last) = 0] = 1 - 2^-last.
    const double expect = 1.0 - std::ldexp(1.0, -static_cast<int>(last));
    SignatureCheck c{"fraction_empty_at_" + std::to_string(last), frac, expect, 0.0, frac >= 0.99};
    rep.checks.push_back(c);
  } else if (name == "mean-not-rate") {
    if (H > 100) rep.checks.push_back(detail::within("mean_Q100", ens.ensemble_mean(100), 1.0, 0.1));
    const std::size_t last = H - 1;
    double none = 1.0;
    for (std::size_t t = std::max<std::size_t>(last / 2, 1); t <= last; ++t) none *= 1.0 - 1.0 / static_cast<double>(t);
    const double p = 1.0 - none;
    double nz = 0.0;
    for (const auto& path : ens.paths()) nz += path.tail_nonzero;
    const double tol = 4.0 * std::sqrt(p * (1.0 - p) / R) + 1e-12;
    auto c = detail::within("tail_spike_fraction", nz / R, p, tol);
    c.passed = c.passed && nz / R > 0.0;
    rep.checks.push_back(c);
  } else if (name == "strong-not-rate") {
    const std::size_t n = static_cast<std::size_t>(std::llround(std::log2(static_cast<double>(H - 1))));
    const auto run = ens.running_average();
    const double exact = (std::ldexp(1.0, static_cast<int>(n + 1)) - 1.0) / (std::ldexp(1.0, static_cast<int>(n)) + 1.0);
    rep.checks.push_back(detail::within("running_average_at_H", run[H], exact, 1e-12 * exact));
    if (n >= 10) rep.checks.push_back(detail::within("running_average_vs_2", run[H], 2.0, 0.005 * 2.0));
    bool ok = true;
    for (std::size_t k = 0; k <= n; ++k) {
      const std::size_t t = std::size_t{1} << k;
      ok = ok && ens.paths()[0].checkpoint_values[ens.checkpoint_index(t)] / static_cast<double>(t) == 1.0;
    }
    rep.checks.push_back({"Q_pow2_over_t_is_1", ok ? 1.0 : 0.0, 1.0, 0.0, ok});
    // Only the n + 1 powers of two may be non-zero.
    const double nonzero = ens.paths()[0].profile.fraction_above(0.0) * static_cast<double>(H);
    rep.checks.push_back(detail::within("nonzero_slots", nonzero, static_cast<double>(n + 1), 1e-6));
  } else {
    check_counterexample_horizon(name, 0);
  }
  return rep;
}

}  // namespace qnet
