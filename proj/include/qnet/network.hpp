#pragma once

// One slot of the multi-queue network with virtual queues.
//
// respect mode: service actually delivered is min(b_k, Q_k); a routed queue
// receives what its upstream queues actually delivered this slot.
// clamped mode: Q' = max(Q - b, 0) + y + a with the nominal y.

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qnet/core_queue.hpp"
#include "qnet/scenario.hpp"

namespace qnet {

enum class ServiceMode { respect, clamped };

inline ServiceMode parse_service_mode(const std::string& s) {
  if (s == "respect") return ServiceMode::respect;
  if (s == "clamped") return ServiceMode::clamped;
  throw std::invalid_argument("unknown mode '" + s + "' (expected respect or clamped)");
}

inline const char* to_string(ServiceMode m) { return m == ServiceMode::respect ? "respect" : "clamped"; }

/// Per-queue flows realized during a slot.
struct NetworkFlows {
  std::vector<double> served;   // b_tilde
  std::vector<double> entered;  // y_tilde
};

/// Precomputed routing lookup shared by every step of a run.
class Router {
 public:
  Router() = default;
  Router(std::size_t n_queues, const std::vector<Route>& routes)
      : sources_(n_queues), routed_(n_queues, false) {
    for (const auto& r : routes) {
      sources_[r.to].push_back(r.from);
      routed_[r.to] = true;
    }
  }
  bool routed(std::size_t k) const { return !routed_.empty() && routed_[k]; }
  const std::vector<std::size_t>& sources(std::size_t k) const { return sources_[k]; }

 private:
  std::vector<std::vector<std::size_t>> sources_;
  std::vector<bool> routed_;
};

/// In-place update; `served`/`entered` must have n_queues entries.
inline void network_step_inplace(std::span<double> q, std::span<double> z, const Action& act,
                                 std::span<const double> g, std::span<const double> a,
                                 ServiceMode mode, const Router& router,
                                 std::span<double> served, std::span<double> entered) {
  const std::size_t K = q.size();
  for (std::size_t k = 0; k < K; ++k) served[k] = std::min(act.b[k], q[k]);
  for (std::size_t k = 0; k < K; ++k) {
    if (mode == ServiceMode::respect && router.routed(k)) {
      double in = 0.0;
      for (std::size_t j : router.sources(k)) in += served[j];
      entered[k] = in;
    } else {
      entered[k] = act.y[k];
    }
  }
  for (std::size_t k = 0; k < K; ++k) q[k] = std::max(q[k] - act.b[k], 0.0) + entered[k] + a[k];
  for (std::size_t l = 0; l < z.size(); ++l) z[l] = std::max(z[l] + g[l], 0.0);
}

/// Value-returning form of network_step_inplace.
inline CompositeState network_step(const CompositeState& s, const Scenario& sc, std::size_t omega,
                                   std::size_t alpha, std::span<const double> a,
                                   ServiceMode mode = ServiceMode::respect,
                                   NetworkFlows* flows = nullptr) {
  const std::size_t K = sc.n_queues;
  if (s.queues.size() != K || s.virtuals.size() != sc.n_constraints() || a.size() != K)
    throw std::invalid_argument("state or arrival dimensions do not match the scenario");
  for (double q : s.queues)
    if (!(q >= 0.0)) throw std::invalid_argument("backlog must be non-negative");
  for (double v : a)
    if (!(v >= 0.0)) throw std::invalid_argument("arrival must be non-negative");
  const ActionOutcome out = evaluate_action(sc, omega, alpha);
  CompositeState next = s;
  NetworkFlows f{std::vector<double>(K), std::vector<double>(K)};
  network_step_inplace(next.queues, next.virtuals, sc.action(omega, alpha), out.g, a, mode,
                       Router(K, sc.routing), f.served, f.entered);
  if (flows) *flows = std::move(f);
  return next;
}

}  // namespace qnet
