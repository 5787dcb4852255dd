#pragma once

// Joint sampling of the network state omega(t) and the exogenous arrivals.
// Per slot the stream is consumed in a fixed order: one draw for omega
// (initial distribution at t = 0, transition row afterwards), then one draw
// per queue for its arrivals in queue order.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "qnet/arrivals.hpp"
#include "qnet/markov_chain.hpp"
#include "qnet/rng.hpp"

namespace qnet {

class ExogenousSampler {
 public:
  ExogenousSampler(const FiniteMarkovChain& chain, std::span<const ArrivalSpec> arrivals,
                   std::vector<double> initial, std::uint64_t stream_seed)
      : chain_(&chain), arrivals_(arrivals), initial_(std::move(initial)), rng_(stream_seed) {}

  /// Advances to the next slot and returns its omega.
  std::size_t next_omega() {
    omega_ = (t_ == 0) ? rng_.categorical(initial_) : rng_.categorical(chain_->row(omega_));
    return omega_;
  }

  /// Fills arrivals for the current slot and moves the slot counter on.
  void next_arrivals(std::span<double> out) {
    for (std::size_t k = 0; k < arrivals_.size(); ++k) out[k] = arrivals_[k].sample(rng_, t_);
    ++t_;
  }

  std::size_t slot() const { return t_; }

 private:
  const FiniteMarkovChain* chain_;
  std::span<const ArrivalSpec> arrivals_;
  std::vector<double> initial_;
  Xoshiro256 rng_;
  std::size_t omega_ = 0;
  std::size_t t_ = 0;
};

struct SamplePath {
  std::size_t horizon = 0;
  std::size_t n_queues = 0;
  std::vector<std::size_t> omega;  // omega[t]
  std::vector<double> arrivals;    // arrivals[t * n_queues + k]

  double arrival(std::size_t t, std::size_t k) const { return arrivals[t * n_queues + k]; }
};

/// Replication `replication` of the exogenous processes under master `seed`.
inline SamplePath sample_path(const FiniteMarkovChain& chain, std::span<const ArrivalSpec> specs,
                              std::uint64_t seed, std::size_t horizon,
                              std::uint64_t replication = 0) {
  if (horizon == 0) throw std::invalid_argument("horizon must be at least 1");
  ExogenousSampler sampler(chain, specs, initial_distribution(chain),
                           substream_seed(seed, replication));
  SamplePath p;
  p.horizon = horizon;
  p.n_queues = specs.size();
  p.omega.resize(horizon);
  p.arrivals.resize(horizon * specs.size());
  for (std::size_t t = 0; t < horizon; ++t) {
    p.omega[t] = sampler.next_omega();
    sampler.next_arrivals(std::span<double>(p.arrivals).subspan(t * specs.size(), specs.size()));
  }
  return p;
}

}  // namespace qnet
