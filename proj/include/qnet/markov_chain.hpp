#pragma once

// Finite-state Markov chains for the network-state process: validation,
// irreducibility and period checks, the exact stationary distribution, and
// the total-variation mixing time computed by matrix powering.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qnet {

class ChainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FiniteMarkovChain {
 public:
  static constexpr double kRowTolerance = 1e-12;

  FiniteMarkovChain() : FiniteMarkovChain(std::vector<std::vector<double>>{{1.0}}) {}

  /// `initial` empty means "start from the stationary distribution".
  explicit FiniteMarkovChain(const std::vector<std::vector<double>>& transition,
                             std::vector<double> initial = {})
      : n_(transition.size()), initial_(std::move(initial)) {
    if (n_ == 0) throw ChainError("chain must have at least one state");
    p_.reserve(n_ * n_);
    for (std::size_t i = 0; i < n_; ++i) {
      if (transition[i].size() != n_) {
        throw ChainError("transition row " + std::to_string(i) + " has " +
                         std::to_string(transition[i].size()) + " entries, expected " +
                         std::to_string(n_));
      }
      double sum = 0.0;
      for (double v : transition[i]) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
          throw ChainError("transition row " + std::to_string(i) +
                           " has an entry outside [0,1]");
        }
        sum += v;
        p_.push_back(v);
      }
      if (std::abs(sum - 1.0) > kRowTolerance) {
        throw ChainError("transition row " + std::to_string(i) + " sums to " +
                         std::to_string(sum) + ", expected 1");
      }
    }
    if (!initial_.empty()) {
      if (initial_.size() != n_) throw ChainError("initial distribution has wrong length");
      double sum = 0.0;
      for (double v : initial_) {
        if (!std::isfinite(v) || v < 0.0) throw ChainError("initial distribution has a negative entry");
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-9) throw ChainError("initial distribution does not sum to 1");
    }
  }

  /// Chain whose rows all equal `probs` (omega i.i.d. over slots).
  static FiniteMarkovChain iid(const std::vector<double>& probs) {
    return FiniteMarkovChain(std::vector<std::vector<double>>(probs.size(), probs));
  }

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return p_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const { return {p_.data() + i * n_, n_}; }
  bool has_initial() const { return !initial_.empty(); }
  const std::vector<double>& initial() const { return initial_; }

 private:
  std::size_t n_;
  std::vector<double> p_;
  std::vector<double> initial_;
};

namespace detail {

inline std::vector<bool> reachable(const FiniteMarkovChain& c, std::size_t from, bool reverse) {
  const std::size_t n = c.size();
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{from};
  seen[from] = true;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t v = 0; v < n; ++v) {
      const double w = reverse ? c(v, u) : c(u, v);
      if (w > 0.0 && !seen[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  return seen;
}

inline std::string state_set(const std::vector<bool>& mask, bool value) {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == value) {
      os << (first ? "" : ", ") << i;
      first = false;
    }
  }
  os << '}';
  return os.str();
}

}  // namespace detail

/// Throws ChainError naming the offending state set if the chain is reducible.
inline void require_irreducible(const FiniteMarkovChain& c) {
  const auto fwd = detail::reachable(c, 0, false);
  if (std::find(fwd.begin(), fwd.end(), false) != fwd.end()) {
    throw ChainError("chain is reducible: states " + detail::state_set(fwd, false) +
                     " are unreachable from state 0");
  }
  const auto back = detail::reachable(c, 0, true);
  if (std::find(back.begin(), back.end(), false) != back.end()) {
    throw ChainError("chain is reducible: states " + detail::state_set(back, false) +
                     " cannot reach state 0");
  }
}

inline bool is_irreducible(const FiniteMarkovChain& c) {
  try {
    require_irreducible(c);
    return true;
  } catch (const ChainError&) {
    return false;
  }
}

/// Period of an irreducible chain (gcd of cycle lengths through BFS levels).
inline std::size_t chain_period(const FiniteMarkovChain& c) {
  require_irreducible(c);
  const std::size_t n = c.size();
  std::vector<long> level(n, -1);
  std::vector<std::size_t> queue{0};
  level[0] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::size_t u = queue[head];
    for (std::size_t v = 0; v < n; ++v) {
      if (c(u, v) > 0.0 && level[v] < 0) {
        level[v] = level[u] + 1;
        queue.push_back(v);
      }
    }
  }
  long g = 0;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (c(u, v) > 0.0) g = std::gcd(g, std::labs(level[u] + 1 - level[v]));
    }
  }
  return static_cast<std::size_t>(g == 0 ? 1 : g);
}

struct StationaryDistribution {
  std::vector<double> pi;
};

/// Solves pi (P - I) = 0, sum pi = 1 by Gaussian elimination with partial
/// pivoting on (P^T - I) with its last row replaced by the normalization.
inline StationaryDistribution stationary_distribution(const FiniteMarkovChain& c) {
  require_irreducible(c);
  const std::size_t n = c.size();
  std::vector<double> a(n * (n + 1), 0.0);
  auto at = [&](std::size_t r, std::size_t col) -> double& { return a[r * (n + 1) + col]; };
  for (std::size_t r = 0; r + 1 < n; ++r) {
    for (std::size_t col = 0; col < n; ++col) at(r, col) = c(col, r) - (r == col ? 1.0 : 0.0);
  }
  for (std::size_t col = 0; col < n; ++col) at(n - 1, col) = 1.0;
  at(n - 1, n) = 1.0;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t r = k + 1; r < n; ++r) {
      if (std::abs(at(r, k)) > std::abs(at(piv, k))) piv = r;
    }
    if (std::abs(at(piv, k)) < 1e-300) throw ChainError("singular balance system");
    if (piv != k) {
      for (std::size_t col = 0; col <= n; ++col) std::swap(at(k, col), at(piv, col));
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == k) continue;
      const double f = at(r, k) / at(k, k);
      if (f == 0.0) continue;
      for (std::size_t col = k; col <= n; ++col) at(r, col) -= f * at(k, col);
    }
  }
  StationaryDistribution out;
  out.pi.resize(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.pi[i] = std::max(0.0, at(i, n) / at(i, i));
    sum += out.pi[i];
  }
  for (double& v : out.pi) v /= sum;
  return out;
}

/// Given initial distribution, or the stationary one when none was set.
inline std::vector<double> initial_distribution(const FiniteMarkovChain& c) {
  return c.has_initial() ? c.initial() : stationary_distribution(c).pi;
}

struct MixingReport {
  double delta = 0.0;
  std::size_t T = 0;
  /// (t, max over start states of TV(P^t(i,.), pi)) for t = 1..T.
  std::vector<std::pair<std::size_t, double>> tv_curve;
};

/// Least t >= 1 with max_i TV(P^t(i,.), pi) <= delta.
inline MixingReport mixing_time(const FiniteMarkovChain& c, double delta,
                                std::size_t max_steps = 1'000'000) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  const std::size_t period = chain_period(c);
  if (period != 1) {
    throw ChainError("chain is periodic with period " + std::to_string(period) +
                     "; randomize over the period to obtain a stationary aperiodic chain");
  }
  const auto pi = stationary_distribution(c).pi;
  const std::size_t n = c.size();

  std::vector<double> pt(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) pt[i * n + j] = c(i, j);
  std::vector<double> next(n * n);

  MixingReport rep;
  rep.delta = delta;
  for (std::size_t t = 1; t <= max_steps; ++t) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double tv = 0.0;
      for (std::size_t j = 0; j < n; ++j) tv += std::abs(pt[i * n + j] - pi[j]);
      worst = std::max(worst, 0.5 * tv);
    }
    worst = std::min(worst, 1.0);
    rep.tv_curve.emplace_back(t, worst);
    if (worst <= delta) {
      rep.T = t;
      return rep;
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += pt[i * n + k] * c(k, j);
        next[i * n + j] = s;
      }
    }
    pt.swap(next);
  }
  throw ChainError("mixing time exceeds " + std::to_string(max_steps) + " steps");
}

/// mixing_time(c, delta).T, with T = 1 whenever delta >= 1 (any frame qualifies).
inline std::size_t mixing_slots(const FiniteMarkovChain& c, double delta) {
  if (delta >= 1.0) return 1;
  return mixing_time(c, delta).T;
}

}  // namespace qnet
