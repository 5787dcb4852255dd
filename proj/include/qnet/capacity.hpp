#pragma once

// The omega-only policy linear program: minimum achievable time-average
// cost f_opt, capacity-region membership and the Slater gap d_max, plus the
// closed-form performance bounds of the drift-plus-penalty controller.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qnet/lp.hpp"
#include "qnet/markov_chain.hpp"
#include "qnet/scenario.hpp"

namespace qnet {

/// p[omega][alpha]: probability of alpha when the network state is omega.
using OmegaOnlyPolicy = std::vector<std::vector<double>>;

struct CapacityLp {
  LinearProgram lp;
  std::vector<std::size_t> offset;  // first variable of each omega
  std::vector<double> pi;
  std::size_t n_policy_vars = 0;
  std::size_t first_queue_row = 0;
  std::size_t first_constraint_row = 0;
};

/// Variables p[omega][alpha] (omega-major). Rows: one normalization per omega,
/// then lambda_k + ybar_k - bbar_k <= 0 per queue, then g_l(xbar) <= 0 per
/// constraint. Objective: f(xbar) without its constant c0.
/// With `slater` an extra variable d >= 0 is appended, d/2 is added to every
/// queue and constraint row and d is maximized.
inline CapacityLp build_lp(const Scenario& s, const std::optional<std::vector<double>>& lambda = {},
                           bool slater = false) {
  CapacityLp c;
  c.pi = stationary_distribution(s.chain).pi;
  const std::size_t W = s.n_states(), K = s.n_queues;
  const std::vector<double> lam = lambda ? *lambda : s.rates();
  if (lam.size() != K) throw std::invalid_argument("lambda vector has wrong length");

  c.offset.resize(W);
  std::size_t nv = 0;
  for (std::size_t w = 0; w < W; ++w) {
    c.offset[w] = nv;
    nv += s.actions[w].size();
  }
  c.n_policy_vars = nv;
  const std::size_t total = nv + (slater ? 1 : 0);
  c.lp.n_vars = total;
  c.lp.objective.assign(total, 0.0);
  c.lp.maximize = slater;

  auto each = [&](auto&& fn) {
    for (std::size_t w = 0; w < W; ++w)
      for (std::size_t a = 0; a < s.actions[w].size(); ++a) fn(w, a, c.offset[w] + a);
  };

  if (slater) {
    c.lp.objective[nv] = 1.0;
  } else {
    each([&](std::size_t w, std::size_t a, std::size_t v) {
      c.lp.objective[v] = c.pi[w] * (s.cost(s.action(w, a).x) - s.cost.c0);
    });
  }

  for (std::size_t w = 0; w < W; ++w) {
    std::vector<double> row(total, 0.0);
    for (std::size_t a = 0; a < s.actions[w].size(); ++a) row[c.offset[w] + a] = 1.0;
    c.lp.add_row(std::move(row), Relation::eq, 1.0, "normalize " + s.omega_names[w]);
  }
  c.first_queue_row = c.lp.rows.size();
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<double> row(total, 0.0);
    each([&](std::size_t w, std::size_t a, std::size_t v) {
      const Action& act = s.action(w, a);
      row[v] = c.pi[w] * (act.y[k] - act.b[k]);
    });
    if (slater) row[nv] = 0.5;
    c.lp.add_row(std::move(row), Relation::le, -lam[k], "queue " + std::to_string(k + 1));
  }
  c.first_constraint_row = c.lp.rows.size();
  for (std::size_t l = 0; l < s.n_constraints(); ++l) {
    const AffineFunction& g = s.constraints[l];
    std::vector<double> row(total, 0.0);
    each([&](std::size_t w, std::size_t a, std::size_t v) {
      row[v] = c.pi[w] * (g(s.action(w, a).x) - g.c0);
    });
    if (slater) row[nv] = 0.5;
    c.lp.add_row(std::move(row), Relation::le, -g.c0, "constraint " + std::to_string(l + 1));
  }
  return c;
}

struct CapacityReport {
  bool feasible = false;
  double f_opt = std::numeric_limits<double>::infinity();
  double d_max = 0.0;
  OmegaOnlyPolicy policy;
  std::vector<std::string> binding_constraints;
  bool outer_bound = false;  // routing present: the LP ignores backlog coupling
  LpStatus status = LpStatus::infeasible;
};

inline OmegaOnlyPolicy extract_policy(const Scenario& s, const CapacityLp& c, const std::vector<double>& x) {
  OmegaOnlyPolicy p(s.n_states());
  for (std::size_t w = 0; w < s.n_states(); ++w)
    for (std::size_t a = 0; a < s.actions[w].size(); ++a) p[w].push_back(x[c.offset[w] + a]);
  return p;
}

/// Largest d with every queue and constraint row satisfied with margin d/2;
/// 0 when lambda lies on the boundary of or outside the capacity region.
inline double slater_dmax(const Scenario& s, const std::optional<std::vector<double>>& lambda = {}) {
  const CapacityLp c = build_lp(s, lambda, true);
  const LpSolution sol = solve_lp(c.lp);
  if (sol.status == LpStatus::infeasible) return 0.0;
  if (sol.status == LpStatus::unbounded) throw ScenarioError("Slater LP is unbounded");
  const double d = sol.x[c.n_policy_vars];
  return d < kLpTolerance ? 0.0 : d;
}

inline CapacityReport solve_fopt(const Scenario& s, const std::optional<std::vector<double>>& lambda = {}) {
  const CapacityLp c = build_lp(s, lambda, false);
  const LpSolution sol = solve_lp(c.lp);
  CapacityReport r;
  r.status = sol.status;
  r.outer_bound = !s.routing.empty();
  if (sol.status == LpStatus::unbounded) throw ScenarioError("capacity LP is unbounded");
  if (sol.status != LpStatus::optimal) return r;
  r.feasible = true;
  r.f_opt = sol.objective + s.cost.c0;
  r.policy = extract_policy(s, c, sol.x);
  for (std::size_t i = c.first_queue_row; i < c.lp.rows.size(); ++i)
    if (sol.slack[i] <= kLpTolerance) r.binding_constraints.push_back(c.lp.rows[i].label);
  r.d_max = slater_dmax(s, lambda);
  return r;
}

inline bool lambda_in_capacity(const Scenario& s, const std::vector<double>& lambda) {
  const CapacityLp c = build_lp(s, lambda, false);
  return solve_lp(c.lp).status == LpStatus::optimal;
}

struct DriftConstants {
  double B = 0.0;
  double D = 0.0;
  std::size_t T = 1;
  double d_max = 0.0;
};

/// B and D by exhaustive maximization over each state's action table,
/// averaged under pi; T is the mixing time at delta = d_max / 4.
inline DriftConstants drift_constants(const Scenario& s, double d_max) {
  if (!(d_max > 0.0)) throw std::invalid_argument("d_max must be positive (lambda not interior)");
  const auto pi = stationary_distribution(s.chain).pi;
  const std::size_t K = s.n_queues;
  DriftConstants dc;
  dc.d_max = d_max;
  for (std::size_t w = 0; w < s.n_states(); ++w) {
    double worst_b = 0.0, worst_d = 0.0, worst_g = 0.0;
    for (const Action& act : s.actions[w]) {
      double half_sq = 0.0, dd = 0.0, gg = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        const double m1 = s.arrivals[k].rate(), m2 = s.arrivals[k].second_moment();
        const double y = act.y[k], b = act.b[k];
        half_sq += 0.5 * b * b + 0.5 * (m2 + 2.0 * m1 * y + y * y);
        // E[(y + a + b)^2]
        dd += m2 + 2.0 * m1 * (y + b) + (y + b) * (y + b);
      }
      for (const auto& g : s.constraints) gg += g(act.x) * g(act.x);
      worst_b = std::max(worst_b, half_sq + gg);
      worst_d = std::max(worst_d, dd);
      worst_g = std::max(worst_g, gg);
    }
    dc.B += pi[w] * worst_b;
    dc.D += pi[w] * (worst_d + worst_g);
  }
  dc.T = mixing_slots(s.chain, d_max / 4.0);
  return dc;
}

struct PerformanceBounds {
  double c0 = 0.0;
  std::size_t T_eps = 1;
  double epsilon = 0.0;
  double backlog_bound = 0.0;  // bound on time-average sum of Q and Z
  double cost_bound = 0.0;     // bound on time-average cost
};

/// Closed-form bounds for a C-approximate controller with weight V.
inline PerformanceBounds performance_bounds(const Scenario& s, double V, double epsilon,
                                            const DriftConstants& drift, double f_opt, double C = 0.0) {
  if (!(V >= 0.0)) throw std::invalid_argument("V must be non-negative");
  if (!(epsilon > 0.0 && epsilon <= drift.d_max / 4.0 * (1.0 + 1e-12)))
    throw std::invalid_argument("epsilon must lie in (0, d_max/4]");
  const ScenarioSummary sum = validate(s);
  PerformanceBounds pb;
  pb.epsilon = epsilon;
  pb.c0 = 4.0 * sum.f_max / drift.d_max + 1.0;
  pb.T_eps = mixing_slots(s.chain, epsilon);
  const double T = static_cast<double>(drift.T);
  pb.backlog_bound = (C + T * drift.B + (T - 1.0) * drift.D + V * (sum.f_max - sum.f_min)) / (drift.d_max / 4.0);
  const double Te = static_cast<double>(pb.T_eps);
  pb.cost_bound = V > 0.0 ? f_opt + pb.c0 * epsilon + (C + drift.B * Te + drift.D * (Te - 1.0)) / V
                          : std::numeric_limits<double>::infinity();
  return pb;
}

}  // namespace qnet
