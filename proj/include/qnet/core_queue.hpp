#pragma once

// Single-queue and virtual-queue recursions, sample-path conservation
// accounting and the quadratic Lyapunov function over the composite state.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qnet {

/// What happened to one queue on one slot.
struct SlotIO {
  double arrival = 0.0;        // a(t) >= 0
  double offered = 0.0;        // b(t), may be negative in single-queue mode
  double actual = 0.0;         // min(b(t), Q(t))
  double negative_part = 0.0;  // -min(b(t), 0)
};

struct QueueStep {
  double backlog = 0.0;
  SlotIO io;
};

namespace detail {

inline void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + " must be finite");
  }
}

/// Neumaier compensated sum; keeps long traces within the conservation tolerance.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace detail

/// Q(t+1) = max[Q(t) - b(t), 0] + a(t).
inline QueueStep queue_step(double q, double a, double b) {
  detail::require_finite(q, "backlog");
  detail::require_finite(a, "arrival");
  detail::require_finite(b, "service");
  if (q < 0.0) throw std::invalid_argument("backlog must be non-negative");
  if (a < 0.0) throw std::invalid_argument("arrival must be non-negative");

  QueueStep s;
  s.io.arrival = a;
  s.io.offered = b;
  s.io.actual = std::min(b, q);
  s.io.negative_part = b < 0.0 ? -b : 0.0;
  s.backlog = std::max(q - b, 0.0) + a;
  return s;
}

/// Z(t+1) = max[Z(t) + g(t), 0].
inline double virtual_queue_step(double z, double g) {
  detail::require_finite(z, "virtual backlog");
  detail::require_finite(g, "constraint value");
  if (z < 0.0) throw std::invalid_argument("virtual backlog must be non-negative");
  return std::max(z + g, 0.0);
}

struct ConservationResult {
  bool ok = true;
  double residual = 0.0;  // (qT - q0) - (sum a - sum actual)
  double tolerance = 0.0;
};

/// Default tolerance: 1e-9 per 10^4 slots (never below 1e-9).
inline double conservation_tolerance(std::size_t slots) {
  return 1e-9 * std::max(1.0, static_cast<double>(slots) / 1e4);
}

/// Checks qT - q0 = sum a - sum b_tilde over a trace produced by queue_step.
inline ConservationResult conservation_check(std::span<const SlotIO> trace, double q0,
                                             double qT) {
  detail::CompensatedSum arrivals;
  detail::CompensatedSum served;
  for (const auto& io : trace) {
    arrivals.add(io.arrival);
    served.add(io.actual);
  }
  ConservationResult r;
  r.residual = (qT - q0) - (arrivals.value() - served.value());
  r.tolerance = conservation_tolerance(trace.size());
  r.ok = std::abs(r.residual) <= r.tolerance;
  return r;
}

/// Theta(t) = [Q(t), Z(t)].
struct CompositeState {
  std::vector<double> queues;
  std::vector<double> virtuals;

  CompositeState() = default;
  CompositeState(std::size_t n_queues, std::size_t n_virtuals)
      : queues(n_queues, 0.0), virtuals(n_virtuals, 0.0) {}
  CompositeState(std::vector<double> q, std::vector<double> z)
      : queues(std::move(q)), virtuals(std::move(z)) {}

  double total() const {
    double s = 0.0;
    for (double q : queues) s += q;
    for (double z : virtuals) s += z;
    return s;
  }

  friend bool operator==(const CompositeState&, const CompositeState&) = default;
};

/// L(Theta) = 1/2 sum Q_k^2 + 1/2 sum Z_l^2.
inline double lyapunov_value(const CompositeState& s) {
  double acc = 0.0;
  for (double q : s.queues) acc += q * q;
  for (double z : s.virtuals) acc += z * z;
  return 0.5 * acc;
}

}  // namespace qnet
