#pragma once

// Finite-horizon estimates of the four stability notions from an ensemble of
// backlog sample paths.
//
// Paths are folded into an EnsembleSummary one at a time, so memory does not
// grow with the number of replications: per path we keep the backlog at the
// geometric checkpoints, its time averages and its empirical exceedance
// profile; across paths we keep the running sum of Q(t) for every slot.
//
// Conventions: a path of length H holds Q(0..H-1). Time averages over the
// first t slots are (1/t) * sum_{tau < t}. Slopes are Q(t)/t at checkpoints
// t = 1, 2, 4, ... (powers of two below H) plus the last slot H-1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qnet {

class InsufficientReplications : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::vector<std::size_t> checkpoint_times(std::size_t horizon) {
  if (horizon < 2) throw std::invalid_argument("need at least two slots for checkpoints");
  std::vector<std::size_t> t;
  for (std::size_t c = 1; c < horizon - 1; c *= 2) t.push_back(c);
  t.push_back(horizon - 1);
  return t;
}

/// Empirical distribution of the values of one path, for counting exceedances.
class ExceedanceProfile {
 public:
  static constexpr std::size_t kMaxDistinct = 65536;

  ExceedanceProfile() = default;

  explicit ExceedanceProfile(std::span<const double> q) : n_(q.size()) {
    if (q.empty()) return;
    if (!dense_integer(q)) {
      std::vector<double> s(q.begin(), q.end());
      std::sort(s.begin(), s.end());
      from_sorted(s);
      if (values_.size() > kMaxDistinct) {
        for (double& v : s) v = coarsen(v);
        values_.clear();
        above_.clear();
        from_sorted(s);
      }
    }
  }

  std::uint64_t size() const { return n_; }
  std::size_t distinct() const { return values_.size(); }

  /// Fraction of samples strictly greater than m.
  double fraction_above(double m) const {
    if (n_ == 0) return 0.0;
    const auto it = std::upper_bound(values_.begin(), values_.end(), m);
    if (it == values_.begin()) return 1.0;
    return static_cast<double>(above_[static_cast<std::size_t>(it - values_.begin()) - 1]) /
           static_cast<double>(n_);
  }

 private:
  // Keeps 11 significant bits, rounding down; only used for very spread paths.
  static double coarsen(double v) {
    if (v <= 0.0 || !std::isfinite(v)) return v;
    int e = 0;
    const double m = std::frexp(v, &e);
    return std::ldexp(std::floor(m * 2048.0) / 2048.0, e);
  }

  bool dense_integer(std::span<const double> q) {
    constexpr double kLimit = 1 << 22;
    double hi = 0.0;
    for (double v : q) {
      if (!(v >= 0.0 && v <= kLimit) || v != std::floor(v)) return false;
      hi = std::max(hi, v);
    }
    std::vector<std::uint64_t> count(static_cast<std::size_t>(hi) + 1, 0);
    for (double v : q) ++count[static_cast<std::size_t>(v)];
    std::uint64_t remaining = n_;
    for (std::size_t v = 0; v < count.size(); ++v) {
      if (count[v] == 0) continue;
      values_.push_back(static_cast<double>(v));
      above_.push_back(remaining - count[v]);
      remaining -= count[v];
    }
    return true;
  }

  void from_sorted(const std::vector<double>& s) {
    std::uint64_t seen = 0;
    for (std::size_t i = 0; i < s.size();) {
      std::size_t j = i;
      while (j < s.size() && s[j] == s[i]) ++j;
      seen += j - i;
      values_.push_back(s[i]);
      above_.push_back(n_ - seen);
      i = j;
    }
  }

  std::uint64_t n_ = 0;
  std::vector<double> values_;        // ascending distinct values
  std::vector<std::uint64_t> above_;  // above_[i] = #samples > values_[i]
};

/// Everything retained about one sample path.
struct PathRecord {
  std::vector<double> checkpoint_values;
  double time_average = 0.0;       // (1/H) sum_{t<H} Q(t)
  double time_average_half = 0.0;  // over the first H/2 slots
  ExceedanceProfile profile;
  ExceedanceProfile profile_half;
  bool tail_nonzero = false;  // some Q(t) > 0 with t in [t_last/2, t_last]
  std::optional<double> net_input_rate;
};

inline PathRecord make_path_record(std::span<const double> q, const std::vector<std::size_t>& checkpoints,
                                   std::optional<double> net_input_rate = {}) {
  const std::size_t H = q.size();
  PathRecord r;
  for (std::size_t t : checkpoints) r.checkpoint_values.push_back(q[t]);
  const std::size_t half = H / 2;
  double s = 0.0, s_half = 0.0;
  for (std::size_t t = 0; t < H; ++t) {
    s += q[t];
    if (t + 1 == half) s_half = s;
  }
  r.time_average = s / static_cast<double>(H);
  r.time_average_half = half > 0 ? s_half / static_cast<double>(half) : r.time_average;
  r.profile = ExceedanceProfile(q);
  r.profile_half = ExceedanceProfile(q.first(std::max<std::size_t>(half, 1)));
  const std::size_t last = H - 1;
  for (std::size_t t = last / 2; t <= last; ++t) {
    if (q[t] > 0.0) {
      r.tail_nonzero = true;
      break;
    }
  }
  r.net_input_rate = net_input_rate;
  return r;
}

/// Running summary of an ensemble of equal-length paths.
class EnsembleSummary {
 public:
  explicit EnsembleSummary(std::size_t horizon)
      : horizon_(horizon), checkpoints_(checkpoint_times(horizon)), sum_(horizon, 0.0) {}

  /// Adds a path; callers add paths in replication order for reproducibility.
  void add(std::span<const double> q, std::optional<double> net_input_rate = {}) {
    if (q.size() != horizon_) throw std::invalid_argument("path length does not match the ensemble horizon");
    for (double v : q)
      if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("backlog values must be finite and non-negative");
    add(make_path_record(q, checkpoints_, net_input_rate), q);
  }

  /// Adds a precomputed record together with its path (for the per-slot sums).
  void add(PathRecord&& rec, std::span<const double> q) {
    for (std::size_t t = 0; t < horizon_; ++t) sum_[t] += q[t];
    paths_.push_back(std::move(rec));
  }

  std::size_t horizon() const { return horizon_; }
  std::size_t n_reps() const { return paths_.size(); }
  const std::vector<std::size_t>& checkpoints() const { return checkpoints_; }
  const std::vector<PathRecord>& paths() const { return paths_; }
  double ensemble_mean(std::size_t t) const { return sum_.at(t) / static_cast<double>(paths_.size()); }

  /// (1/t) sum_{tau<t} mean Q(tau) for t = 1..H; index 0 is unused.
  std::vector<double> running_average() const {
    std::vector<double> r(horizon_ + 1, 0.0);
    double s = 0.0;
    for (std::size_t t = 0; t < horizon_; ++t) {
      s += sum_[t];
      r[t + 1] = s / static_cast<double>(paths_.size()) / static_cast<double>(t + 1);
    }
    return r;
  }

  std::size_t checkpoint_index(std::size_t t) const {
    const auto it = std::find(checkpoints_.begin(), checkpoints_.end(), t);
    if (it == checkpoints_.end()) throw std::invalid_argument("t=" + std::to_string(t) + " is not a checkpoint");
    return static_cast<std::size_t>(it - checkpoints_.begin());
  }

 private:
  std::size_t horizon_;
  std::vector<std::size_t> checkpoints_;
  std::vector<double> sum_;
  std::vector<PathRecord> paths_;
};

struct StabilityThresholds {
  double slope = 0.01;       // Q(t)/t at the last checkpoint
  double tail = 0.05;        // g(M_max)
  double tail_drift = 0.05;  // max_M |g(M) - g_half(M)|
  double plateau = 0.10;     // relative growth of the strong metric over the last doubling
  double m_max_factor = 20.0;
  std::size_t grid_points = 16;
  std::size_t min_horizon = 1000;
  std::size_t min_reps_mean_rate = 100;
  bool require_mean_rate = false;
};

struct CheckpointSlope {
  std::size_t t = 0;
  double median = 0.0;
  double mean = 0.0;
};

struct StabilityVerdict {
  std::size_t horizon = 0;
  std::size_t n_reps = 0;
  std::size_t final_t = 0;
  double rate_slope = 0.0;
  double mean_rate_slope = 0.0;
  std::vector<CheckpointSlope> slopes;
  double mean_backlog = 0.0;     // running average of the ensemble mean at H
  double strong_metric = 0.0;    // max running average over [H/2, H]
  double strong_previous = 0.0;  // max running average over [H/4, H/2)
  double plateau_change = 0.0;
  double m_max = 0.0;
  std::vector<double> grid;
  std::vector<double> g;
  std::vector<double> g_half;
  std::vector<double> h_mean;
  std::vector<double> h_p05;
  std::vector<double> h_p95;
  double tail_drift = 0.0;
  double tail_nonzero_fraction = 0.0;
  std::optional<double> max_net_input_rate;
  std::size_t markov_violations = 0;

  bool rate_stable = false;
  std::optional<bool> mean_rate_stable;  // empty when too few replications
  bool steady_state_stable = false;
  bool strongly_stable = false;
  StabilityThresholds thresholds;
};

namespace detail {

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Linear-interpolation quantile of sorted data.
inline double quantile_sorted(const std::vector<double>& s, double p) {
  if (s.size() == 1) return s[0];
  const double h = p * static_cast<double>(s.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

}  // namespace detail

/// Geometric M-grid: `points` values from 1 to m_max (from m_max/16 when m_max <= 1).
inline std::vector<double> exceedance_grid(double m_max, std::size_t points) {
  std::vector<double> grid(points, 1.0);
  if (!(m_max > 0.0)) return grid;
  const double lo = m_max > 1.0 ? 1.0 : m_max / 16.0;
  if (points == 1) return {m_max};
  for (std::size_t i = 0; i < points; ++i)
    grid[i] = lo * std::pow(m_max / lo, static_cast<double>(i) / static_cast<double>(points - 1));
  grid.back() = m_max;
  return grid;
}

inline StabilityVerdict estimate_verdict(const EnsembleSummary& ens, const StabilityThresholds& th = {}) {
  const std::size_t H = ens.horizon();
  const std::size_t R = ens.n_reps();
  if (R == 0) throw std::invalid_argument("ensemble has no replications");
  if (H < th.min_horizon)
    throw std::invalid_argument("horizon " + std::to_string(H) + " is below the minimum of " +
                                std::to_string(th.min_horizon));
  const bool mean_rate_ok = R >= th.min_reps_mean_rate;
  if (th.require_mean_rate && !mean_rate_ok)
    throw InsufficientReplications("mean-rate estimate needs at least " + std::to_string(th.min_reps_mean_rate) +
                                   " replications, got " + std::to_string(R));

  StabilityVerdict v;
  v.thresholds = th;
  v.horizon = H;
  v.n_reps = R;
  const auto& cps = ens.checkpoints();
  v.final_t = cps.back();
  for (std::size_t c = 0; c < cps.size(); ++c) {
    std::vector<double> s;
    s.reserve(R);
    double mean = 0.0;
    for (const auto& p : ens.paths()) {
      const double x = p.checkpoint_values[c] / static_cast<double>(cps[c]);
      s.push_back(x);
      mean += x;
    }
    v.slopes.push_back({cps[c], detail::median(std::move(s)), mean / static_cast<double>(R)});
  }
  v.rate_slope = v.slopes.back().median;
  v.mean_rate_slope = v.slopes.back().mean;

  const auto run = ens.running_average();
  v.mean_backlog = run[H];
  v.strong_metric = 0.0;
  for (std::size_t t = std::max<std::size_t>(H / 2, 1); t <= H; ++t) v.strong_metric = std::max(v.strong_metric, run[t]);
  for (std::size_t t = std::max<std::size_t>(H / 4, 1); t < std::max<std::size_t>(H / 2, 1); ++t)
    v.strong_previous = std::max(v.strong_previous, run[t]);
  if (v.strong_previous > 0.0)
    v.plateau_change = (v.strong_metric - v.strong_previous) / v.strong_previous;
  else
    v.plateau_change = v.strong_metric > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;

  v.m_max = th.m_max_factor * v.mean_backlog;
  v.grid = exceedance_grid(v.m_max, th.grid_points);
  const std::size_t G = v.grid.size();
  v.g.assign(G, 0.0);
  v.g_half.assign(G, 0.0);
  v.h_mean.assign(G, 0.0);
  v.h_p05.assign(G, 0.0);
  v.h_p95.assign(G, 0.0);
  std::vector<double> h(R);
  for (std::size_t i = 0; i < G; ++i) {
    double gh = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      h[r] = ens.paths()[r].profile.fraction_above(v.grid[i]);
      gh += ens.paths()[r].profile_half.fraction_above(v.grid[i]);
    }
    double s = 0.0;
    for (double x : h) s += x;
    v.g[i] = s / static_cast<double>(R);
    v.h_mean[i] = v.g[i];
    v.g_half[i] = gh / static_cast<double>(R);
    std::vector<double> sorted = h;
    std::sort(sorted.begin(), sorted.end());
    v.h_p05[i] = detail::quantile_sorted(sorted, 0.05);
    v.h_p95[i] = detail::quantile_sorted(sorted, 0.95);
    v.tail_drift = std::max(v.tail_drift, std::abs(v.g[i] - v.g_half[i]));
    if (v.g[i] > v.strong_metric / v.grid[i] * (1.0 + 1e-12) + 1e-300) ++v.markov_violations;
  }

  std::size_t nz = 0;
  for (const auto& p : ens.paths()) {
    nz += p.tail_nonzero;
    if (p.net_input_rate)
      v.max_net_input_rate = std::max(v.max_net_input_rate.value_or(-std::numeric_limits<double>::infinity()),
                                      *p.net_input_rate);
  }
  v.tail_nonzero_fraction = static_cast<double>(nz) / static_cast<double>(R);

  v.rate_stable = v.rate_slope <= th.slope;
  if (mean_rate_ok) v.mean_rate_stable = v.mean_rate_slope <= th.slope;
  v.steady_state_stable = v.g.back() <= th.tail && v.tail_drift <= th.tail_drift;
  v.strongly_stable = std::isfinite(v.strong_metric) && v.plateau_change < th.plateau;
  return v;
}

struct BB1ClosedForm {
  double mean_backlog = 0.0;  // Q bar
  double mean_delay = 0.0;    // W bar
};

/// Steady-state backlog and delay of the discrete-time Bernoulli/Bernoulli/1 queue.
inline BB1ClosedForm bb1_closed_form(double lambda, double mu) {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw std::invalid_argument("lambda must lie in [0,1)");
  if (!(mu > 0.0 && mu <= 1.0)) throw std::invalid_argument("mu must lie in (0,1]");
  if (lambda >= mu) throw std::invalid_argument("no steady state: lambda >= mu");
  return {lambda * (1.0 - lambda) / (mu - lambda), (1.0 - lambda) / (mu - lambda)};
}

}  // namespace qnet
