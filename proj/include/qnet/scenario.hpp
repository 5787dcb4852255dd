#pragma once

// Scenario description: network-state chain, per-state action menus with
// their (y, b, x) outcomes, affine cost and constraint functions, arrivals
// and optional routing. validate() enforces the modelling assumptions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qnet/arrivals.hpp"
#include "qnet/markov_chain.hpp"

namespace qnet {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Action {
  std::string name;
  std::vector<double> y;  // endogenous arrivals, size K
  std::vector<double> b;  // offered service, size K
  std::vector<double> x;  // attributes, size M
};

/// h(x) = c0 + c . x
struct AffineFunction {
  double c0 = 0.0;
  std::vector<double> c;

  double operator()(std::span<const double> x) const {
    double v = c0;
    for (std::size_t m = 0; m < c.size(); ++m) v += c[m] * x[m];
    return v;
  }
};

/// Departures of queue `from` feed queue `to` on the next slot.
struct Route {
  std::size_t from = 0;
  std::size_t to = 0;
};

struct Scenario {
  std::string name;
  std::size_t n_queues = 1;
  std::size_t n_attributes = 1;
  std::vector<std::string> omega_names;
  FiniteMarkovChain chain;
  std::vector<std::vector<Action>> actions;  // actions[omega][alpha]
  AffineFunction cost;
  std::vector<AffineFunction> constraints;
  std::vector<ArrivalSpec> arrivals;
  std::vector<Route> routing;

  std::size_t n_states() const { return chain.size(); }
  std::size_t n_constraints() const { return constraints.size(); }
  const Action& action(std::size_t omega, std::size_t alpha) const { return actions[omega][alpha]; }
  std::vector<double> rates() const {
    std::vector<double> r;
    for (const auto& a : arrivals) r.push_back(a.rate());
    return r;
  }
};

/// Outcome of an action in a given state: y, b, x, f(x) and g(x).
struct ActionOutcome {
  std::vector<double> y;
  std::vector<double> b;
  std::vector<double> x;
  double f = 0.0;
  std::vector<double> g;
};

inline ActionOutcome evaluate_action(const Scenario& s, std::size_t omega, std::size_t alpha) {
  if (omega >= s.n_states()) throw std::out_of_range("omega index out of range");
  if (alpha >= s.actions[omega].size()) throw std::out_of_range("action index out of range");
  const Action& a = s.actions[omega][alpha];
  ActionOutcome o{a.y, a.b, a.x, s.cost(a.x), {}};
  for (const auto& h : s.constraints) o.g.push_back(h(a.x));
  return o;
}

struct ScenarioSummary {
  std::vector<double> pi;
  double sigma2 = 0.0;  // bound on second moments of y, b, a and g
  double f_min = 0.0;
  double f_max = 0.0;
};

/// Throws ScenarioError on the first violated assumption.
inline ScenarioSummary validate(const Scenario& s) {
  auto fail = [](const std::string& m) { throw ScenarioError(m); };
  const std::size_t K = s.n_queues, M = s.n_attributes, W = s.n_states();
  if (K == 0) fail("scenario needs at least one queue");
  if (s.omega_names.size() != W) fail("omega names do not match the chain size");
  if (s.actions.size() != W) fail("action table has " + std::to_string(s.actions.size()) +
                                  " states, chain has " + std::to_string(W));
  if (s.cost.c.size() != M) fail("cost has wrong number of coefficients");
  if (!std::isfinite(s.cost.c0)) fail("cost constant is not finite");
  for (double v : s.cost.c)
    if (!std::isfinite(v)) fail("cost coefficient is not finite");
  for (std::size_t l = 0; l < s.constraints.size(); ++l) {
    if (s.constraints[l].c.size() != M) fail("constraint " + std::to_string(l) + " has wrong number of coefficients");
    if (!std::isfinite(s.constraints[l].c0)) fail("constraint " + std::to_string(l) + " constant is not finite");
    for (double v : s.constraints[l].c)
      if (!std::isfinite(v)) fail("constraint " + std::to_string(l) + " coefficient is not finite");
  }
  if (s.arrivals.size() != K) fail("need one arrival process per queue");

  std::vector<bool> routed(K, false);
  for (const auto& r : s.routing) {
    if (r.from >= K || r.to >= K) fail("route endpoint out of range");
    if (r.from == r.to) fail("route from a queue to itself");
    routed[r.to] = true;
  }

  try {
    require_irreducible(s.chain);
  } catch (const ChainError& e) {
    fail(e.what());
  }

  ScenarioSummary out;
  out.pi = stationary_distribution(s.chain).pi;
  out.f_min = std::numeric_limits<double>::infinity();
  out.f_max = -std::numeric_limits<double>::infinity();
  for (std::size_t w = 0; w < W; ++w) {
    if (s.actions[w].empty()) fail("state " + s.omega_names[w] + " has no actions");
    for (std::size_t al = 0; al < s.actions[w].size(); ++al) {
      const Action& a = s.actions[w][al];
      const std::string where = "action " + s.omega_names[w] + "/" + a.name;
      if (a.y.size() != K || a.b.size() != K) fail(where + ": y and b need one entry per queue");
      if (a.x.size() != M) fail(where + ": x needs one entry per attribute");
      for (std::size_t k = 0; k < K; ++k) {
        if (!std::isfinite(a.y[k]) || !std::isfinite(a.b[k])) fail(where + ": non-finite y or b");
        if (a.y[k] < 0.0 || a.b[k] < 0.0) fail(where + ": y and b must be non-negative");
        out.sigma2 = std::max({out.sigma2, a.y[k] * a.y[k], a.b[k] * a.b[k]});
      }
      for (double v : a.x)
        if (!std::isfinite(v)) fail(where + ": non-finite attribute");
      for (std::size_t k = 0; k < K; ++k) {
        if (!routed[k]) continue;
        double expect = 0.0;
        for (const auto& r : s.routing)
          if (r.to == k) expect += a.b[r.from];
        if (std::abs(expect - a.y[k]) > 1e-12)
          fail(where + ": y of routed queue " + std::to_string(k) + " must equal the routed service");
      }
      const double f = s.cost(a.x);
      out.f_min = std::min(out.f_min, f);
      out.f_max = std::max(out.f_max, f);
      for (const auto& h : s.constraints) {
        const double g = h(a.x);
        out.sigma2 = std::max(out.sigma2, g * g);
      }
    }
  }
  for (const auto& a : s.arrivals) out.sigma2 = std::max(out.sigma2, a.second_moment());
  return out;
}

/// Sets every queue's arrival rate; Bernoulli processes keep their size and
/// get p = lambda / size.
inline void override_rates(Scenario& s, const std::vector<double>& lambda) {
  if (lambda.size() == 1 && s.n_queues > 1) {
    override_rates(s, std::vector<double>(s.n_queues, lambda[0]));
    return;
  }
  if (lambda.size() != s.n_queues)
    throw ScenarioError("--lambda needs 1 or " + std::to_string(s.n_queues) + " values");
  for (std::size_t k = 0; k < s.n_queues; ++k) {
    const auto* b = std::get_if<BernoulliArrivals>(&s.arrivals[k].kind());
    if (!b) throw ScenarioError("rate override needs bernoulli arrivals at queue " + std::to_string(k + 1));
    if (!(b->size > 0.0)) throw ScenarioError("rate override needs a positive bernoulli size");
    s.arrivals[k] = ArrivalSpec::bernoulli(lambda[k] / b->size, b->size);
  }
}

/// Makes a two-state network process i.i.d. with Pr[second state] = mu.
inline void override_service_probability(Scenario& s, double mu) {
  if (s.n_states() != 2) throw ScenarioError("--mu applies only to scenarios with two network states");
  if (!(mu >= 0.0 && mu <= 1.0)) throw ScenarioError("mu must lie in [0,1]");
  s.chain = FiniteMarkovChain::iid({1.0 - mu, mu});
}

/// Discrete-time Bernoulli/Bernoulli/1 queue as a scenario: the server is ON
/// with probability mu each slot and serving costs one unit.
inline Scenario bb1_scenario(double lambda, double mu) {
  Scenario s;
  s.name = "bb1";
  s.n_queues = 1;
  s.n_attributes = 1;
  s.omega_names = {"OFF", "ON"};
  s.chain = FiniteMarkovChain::iid({1.0 - mu, mu});
  s.actions = {{{"idle", {0.0}, {0.0}, {0.0}}}, {{"idle", {0.0}, {0.0}, {0.0}}, {"serve", {0.0}, {1.0}, {1.0}}}};
  s.cost = {0.0, {1.0}};
  s.arrivals = {ArrivalSpec::bernoulli(lambda)};
  return s;
}

}  // namespace qnet
