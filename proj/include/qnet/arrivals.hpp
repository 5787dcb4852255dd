#pragma once

// Exogenous arrival processes a_k(t). Every generator knows its analytic
// mean (the arrival rate lambda_k) and second moment.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "qnet/rng.hpp"

namespace qnet {

namespace detail {

template <class... Fs>
struct Overload : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overload(Fs...) -> Overload<Fs...>;

}  // namespace detail

/// `size` units arrive with probability p, otherwise none.
struct BernoulliArrivals {
  double p = 0.0;
  double size = 1.0;
};

/// Cyclic deterministic sequence: a(t) = sequence[t mod n].
struct DeterministicArrivals {
  std::vector<double> sequence;
};

/// i.i.d. draws from a finite table of values.
struct TableArrivals {
  std::vector<double> values;
  std::vector<double> probs;
};

class ArrivalSpec {
 public:
  using Kind = std::variant<BernoulliArrivals, DeterministicArrivals, TableArrivals>;

  ArrivalSpec() : ArrivalSpec(BernoulliArrivals{0.0, 1.0}) {}

  explicit ArrivalSpec(Kind kind) : kind_(std::move(kind)) { check(); }

  static ArrivalSpec bernoulli(double p, double size = 1.0) {
    return ArrivalSpec(BernoulliArrivals{p, size});
  }
  static ArrivalSpec deterministic(std::vector<double> seq) {
    return ArrivalSpec(DeterministicArrivals{std::move(seq)});
  }
  static ArrivalSpec table(std::vector<double> values, std::vector<double> probs) {
    return ArrivalSpec(TableArrivals{std::move(values), std::move(probs)});
  }

  const Kind& kind() const { return kind_; }
  std::string kind_name() const {
    return std::visit(detail::Overload{[](const BernoulliArrivals&) { return std::string("bernoulli"); },
                               [](const DeterministicArrivals&) { return std::string("deterministic"); },
                               [](const TableArrivals&) { return std::string("table"); }},
                      kind_);
  }

  /// Declared arrival rate lambda = E[a(t)] (time average for deterministic).
  double rate() const {
    return std::visit(
        detail::Overload{[](const BernoulliArrivals& b) { return b.p * b.size; },
                 [](const DeterministicArrivals& d) {
                   return std::accumulate(d.sequence.begin(), d.sequence.end(), 0.0) /
                          static_cast<double>(d.sequence.size());
                 },
                 [](const TableArrivals& t) {
                   double m = 0.0;
                   for (std::size_t i = 0; i < t.values.size(); ++i) m += t.values[i] * t.probs[i];
                   return m;
                 }},
        kind_);
  }

  double second_moment() const {
    return std::visit(
        detail::Overload{[](const BernoulliArrivals& b) { return b.p * b.size * b.size; },
                 [](const DeterministicArrivals& d) {
                   double m = 0.0;
                   for (double v : d.sequence) m += v * v;
                   return m / static_cast<double>(d.sequence.size());
                 },
                 [](const TableArrivals& t) {
                   double m = 0.0;
                   for (std::size_t i = 0; i < t.values.size(); ++i)
                     m += t.values[i] * t.values[i] * t.probs[i];
                   return m;
                 }},
        kind_);
  }

  /// Largest single-slot arrival.
  double max_value() const {
    return std::visit(detail::Overload{[](const BernoulliArrivals& b) { return b.p > 0.0 ? b.size : 0.0; },
                               [](const DeterministicArrivals& d) {
                                 double m = 0.0;
                                 for (double v : d.sequence) m = std::max(m, v);
                                 return m;
                               },
                               [](const TableArrivals& t) {
                                 double m = 0.0;
                                 for (std::size_t i = 0; i < t.values.size(); ++i)
                                   if (t.probs[i] > 0.0) m = std::max(m, t.values[i]);
                                 return m;
                               }},
                      kind_);
  }

  /// Draws a(t). Deterministic sequences consume no randomness.
  double sample(Xoshiro256& rng, std::size_t t) const {
    return std::visit(detail::Overload{[&](const BernoulliArrivals& b) { return rng.bernoulli(b.p) ? b.size : 0.0; },
                               [&](const DeterministicArrivals& d) { return d.sequence[t % d.sequence.size()]; },
                               [&](const TableArrivals& tb) { return tb.values[rng.categorical(tb.probs)]; }},
                      kind_);
  }

 private:
  void check() const {
    std::visit(detail::Overload{[](const BernoulliArrivals& b) {
                          if (!(b.p >= 0.0 && b.p <= 1.0)) throw std::invalid_argument("bernoulli p must lie in [0,1]");
                          if (!(std::isfinite(b.size) && b.size >= 0.0))
                            throw std::invalid_argument("bernoulli size must be finite and non-negative");
                        },
                        [](const DeterministicArrivals& d) {
                          if (d.sequence.empty()) throw std::invalid_argument("deterministic sequence is empty");
                          for (double v : d.sequence)
                            if (!(std::isfinite(v) && v >= 0.0))
                              throw std::invalid_argument("deterministic arrivals must be finite and non-negative");
                        },
                        [](const TableArrivals& t) {
                          if (t.values.empty() || t.values.size() != t.probs.size())
                            throw std::invalid_argument("table arrivals need equal-length non-empty values/probs");
                          double s = 0.0;
                          for (std::size_t i = 0; i < t.values.size(); ++i) {
                            if (!(std::isfinite(t.values[i]) && t.values[i] >= 0.0))
                              throw std::invalid_argument("table arrival values must be finite and non-negative");
                            if (!(t.probs[i] >= 0.0)) throw std::invalid_argument("table probabilities must be non-negative");
                            s += t.probs[i];
                          }
                          if (std::abs(s - 1.0) > 1e-12) throw std::invalid_argument("table probabilities must sum to 1");
                        }},
               kind_);
  }

  Kind kind_;
};

}  // namespace qnet
