#pragma once

// Reference computations used to check the library. Each one takes a
// different route from the production code: closed forms, brute-force
// enumeration or naive iteration.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "qnet/scenario.hpp"

namespace oracle {

/// Stationary law of the two-state chain with flip probabilities p01, p10.
inline std::vector<double> two_state_pi(double p01, double p10) {
  return {p10 / (p01 + p10), p01 / (p01 + p10)};
}

/// Mixing time of a two-state chain: the TV distance after t steps is
/// max(pi0, pi1) * |1 - p01 - p10|^t.
inline std::size_t two_state_mixing(double p01, double p10, double delta) {
  const auto pi = two_state_pi(p01, p10);
  const double r = std::abs(1.0 - p01 - p10);
  const double c = std::max(pi[0], pi[1]);
  std::size_t t = 1;
  while (c * std::pow(r, static_cast<double>(t)) > delta) ++t;
  return t;
}

/// Max-row TV distance after t steps, by propagating each start vector.
inline double tv_after(const std::vector<std::vector<double>>& P, const std::vector<double>& pi, std::size_t t) {
  const std::size_t n = P.size();
  double worst = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<double> v(n, 0.0);
    v[s] = 1.0;
    for (std::size_t step = 0; step < t; ++step) {
      std::vector<double> w(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) w[j] += v[i] * P[i][j];
      v = w;
    }
    double tv = 0.0;
    for (std::size_t j = 0; j < n; ++j) tv += std::abs(v[j] - pi[j]);
    worst = std::max(worst, 0.5 * tv);
  }
  return worst;
}

/// Exhaustive DPP minimization straight from the action tables.
inline std::size_t brute_force_argmin(const qnet::Scenario& s, std::size_t w, const std::vector<double>& q,
                                      const std::vector<double>& z, double V) {
  std::size_t best = 0;
  double best_v = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < s.actions[w].size(); ++a) {
    const auto& act = s.actions[w][a];
    double f = s.cost.c0;
    for (std::size_t m = 0; m < act.x.size(); ++m) f += s.cost.c[m] * act.x[m];
    double v = V * f;
    for (std::size_t l = 0; l < z.size(); ++l) {
      double g = s.constraints[l].c0;
      for (std::size_t m = 0; m < act.x.size(); ++m) g += s.constraints[l].c[m] * act.x[m];
      v += z[l] * g;
    }
    for (std::size_t k = 0; k < q.size(); ++k) v += q[k] * (act.y[k] - act.b[k]);
    if (v < best_v) {
      best_v = v;
      best = a;
    }
  }
  return best;
}

/// Calls fn(p) for every probability vector of length n on the grid with the
/// given number of steps (entries multiples of 1/steps).
inline void for_each_simplex_point(std::size_t n, std::size_t steps,
                                   const std::function<void(const std::vector<double>&)>& fn) {
  std::vector<std::size_t> c(n, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t left) {
    if (i + 1 == n) {
      c[i] = left;
      std::vector<double> p(n);
      for (std::size_t j = 0; j < n; ++j) p[j] = static_cast<double>(c[j]) / static_cast<double>(steps);
      fn(p);
      return;
    }
    for (std::size_t k = 0; k <= left; ++k) {
      c[i] = k;
      rec(i + 1, left - k);
    }
  };
  rec(0, steps);
}

struct GridResult {
  bool feasible = false;
  double f_opt = std::numeric_limits<double>::infinity();
};

/// Minimum of f(xbar) over omega-only policies on a product grid of step
/// 1/steps. A point counts as feasible when every queue and constraint row
/// holds within `slack`.
inline GridResult grid_fopt(const qnet::Scenario& s, const std::vector<double>& pi, std::size_t steps,
                            double slack) {
  const std::size_t W = s.n_states(), K = s.n_queues, L = s.n_constraints();
  const auto lam = s.rates();
  // Per-state contribution of a policy row: (queue drifts, constraint terms, cost).
  struct Contribution {
    std::vector<double> q, g;
    double f;
  };
  std::vector<std::vector<Contribution>> options(W);
  for (std::size_t w = 0; w < W; ++w) {
    for_each_simplex_point(s.actions[w].size(), steps, [&](const std::vector<double>& p) {
      Contribution c{std::vector<double>(K, 0.0), std::vector<double>(L, 0.0), 0.0};
      for (std::size_t a = 0; a < p.size(); ++a) {
        const auto& act = s.actions[w][a];
        for (std::size_t k = 0; k < K; ++k) c.q[k] += pi[w] * p[a] * (act.y[k] - act.b[k]);
        for (std::size_t l = 0; l < L; ++l) c.g[l] += pi[w] * p[a] * (s.constraints[l](act.x) - s.constraints[l].c0);
        c.f += pi[w] * p[a] * (s.cost(act.x) - s.cost.c0);
      }
      options[w].push_back(std::move(c));
    });
  }
  GridResult best;
  Contribution acc{std::vector<double>(K, 0.0), std::vector<double>(L, 0.0), 0.0};
  std::function<void(std::size_t)> rec = [&](std::size_t w) {
    if (w == W) {
      for (std::size_t k = 0; k < K; ++k)
        if (lam[k] + acc.q[k] > slack) return;
      for (std::size_t l = 0; l < L; ++l)
        if (s.constraints[l].c0 + acc.g[l] > slack) return;
      best.feasible = true;
      best.f_opt = std::min(best.f_opt, acc.f + s.cost.c0);
      return;
    }
    for (const auto& c : options[w]) {
      for (std::size_t k = 0; k < K; ++k) acc.q[k] += c.q[k];
      for (std::size_t l = 0; l < L; ++l) acc.g[l] += c.g[l];
      acc.f += c.f;
      rec(w + 1);
      for (std::size_t k = 0; k < K; ++k) acc.q[k] -= c.q[k];
      for (std::size_t l = 0; l < L; ++l) acc.g[l] -= c.g[l];
      acc.f -= c.f;
    }
  };
  rec(0);
  return best;
}

/// Solves A x = b (square) by Gaussian elimination; false if singular.
inline bool solve_square(std::vector<std::vector<double>> A, std::vector<double> b, std::vector<double>& x) {
  const std::size_t n = A.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t r = k + 1; r < n; ++r)
      if (std::abs(A[r][k]) > std::abs(A[piv][k])) piv = r;
    if (std::abs(A[piv][k]) < 1e-12) return false;
    std::swap(A[k], A[piv]);
    std::swap(b[k], b[piv]);
    for (std::size_t r = k + 1; r < n; ++r) {
      const double f = A[r][k] / A[k][k];
      for (std::size_t c = k; c < n; ++c) A[r][c] -= f * A[k][c];
      b[r] -= f * b[k];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t k = n; k-- > 0;) {
    double v = b[k];
    for (std::size_t c = k + 1; c < n; ++c) v -= A[k][c] * x[c];
    x[k] = v / A[k][k];
  }
  return true;
}

/// Exact optimum of the omega-only LP by enumerating every basis of the
/// equality form (slack variables added to the inequality rows).
inline GridResult vertex_fopt(const qnet::Scenario& s, const std::vector<double>& pi) {
  const std::size_t W = s.n_states(), K = s.n_queues, L = s.n_constraints();
  const auto lam = s.rates();
  std::vector<std::size_t> off;
  std::size_t nv = 0;
  for (std::size_t w = 0; w < W; ++w) {
    off.push_back(nv);
    nv += s.actions[w].size();
  }
  const std::size_t m = W + K + L;
  const std::size_t n = nv + K + L;
  std::vector<std::vector<double>> A(m, std::vector<double>(n, 0.0));
  std::vector<double> b(m, 0.0), c(n, 0.0);
  for (std::size_t w = 0; w < W; ++w) {
    for (std::size_t a = 0; a < s.actions[w].size(); ++a) {
      const auto& act = s.actions[w][a];
      const std::size_t v = off[w] + a;
      A[w][v] = 1.0;
      for (std::size_t k = 0; k < K; ++k) A[W + k][v] = pi[w] * (act.y[k] - act.b[k]);
      for (std::size_t l = 0; l < L; ++l) A[W + K + l][v] = pi[w] * (s.constraints[l](act.x) - s.constraints[l].c0);
      c[v] = pi[w] * (s.cost(act.x) - s.cost.c0);
    }
    b[w] = 1.0;
  }
  for (std::size_t k = 0; k < K; ++k) {
    A[W + k][nv + k] = 1.0;
    b[W + k] = -lam[k];
  }
  for (std::size_t l = 0; l < L; ++l) {
    A[W + K + l][nv + K + l] = 1.0;
    b[W + K + l] = -s.constraints[l].c0;
  }

  GridResult best;
  std::vector<std::size_t> pick;
  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    if (pick.size() == m) {
      std::vector<std::vector<double>> B(m, std::vector<double>(m));
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t j = 0; j < m; ++j) B[r][j] = A[r][pick[j]];
      std::vector<double> x;
      if (!solve_square(B, b, x)) return;
      double obj = s.cost.c0;
      for (std::size_t j = 0; j < m; ++j) {
        if (x[j] < -1e-9) return;
        obj += c[pick[j]] * x[j];
      }
      best.feasible = true;
      best.f_opt = std::min(best.f_opt, obj);
      return;
    }
    for (std::size_t j = start; j + (m - pick.size()) <= n; ++j) {
      pick.push_back(j);
      rec(j + 1);
      pick.pop_back();
    }
  };
  rec(0);
  return best;
}

/// Stationary mean backlog of the discrete-time B/B/1 queue, from the
/// truncated birth-death chain Q' = max(Q - s, 0) + a solved by iteration.
inline double bb1_mean_backlog(double lambda, double mu, std::size_t cap = 200) {
  std::vector<double> p(cap + 1, 0.0), next(cap + 1);
  p[0] = 1.0;
  for (int it = 0; it < 200000; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t q = 0; q <= cap; ++q) {
      if (p[q] == 0.0) continue;
      for (int served = 0; served <= 1; ++served) {
        const double ps = served ? mu : 1.0 - mu;
        for (int arr = 0; arr <= 1; ++arr) {
          const double pa = arr ? lambda : 1.0 - lambda;
          std::size_t nq = (q > 0 && served ? q - 1 : q) + static_cast<std::size_t>(arr);
          nq = std::min(nq, cap);
          next[nq] += p[q] * ps * pa;
        }
      }
    }
    double diff = 0.0;
    for (std::size_t q = 0; q <= cap; ++q) diff += std::abs(next[q] - p[q]);
    p.swap(next);
    if (diff < 1e-14) break;
  }
  double mean = 0.0;
  for (std::size_t q = 0; q <= cap; ++q) mean += static_cast<double>(q) * p[q];
  return mean;
}

}  // namespace oracle
