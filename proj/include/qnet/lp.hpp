#pragma once

// Dense two-phase tableau simplex for small linear programs.
//
//   minimize (or maximize)  c . x
//   subject to              row_i . x  {<=, =, >=}  rhs_i,   x >= 0
//
// Bland's rule is used for both entering and leaving variables, so the
// method cannot cycle. Everything is double precision with a fixed
// tolerance; intended for problems with at most a few hundred variables.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace qnet {

enum class Relation { le, eq, ge };
enum class LpStatus { optimal, infeasible, unbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
  }
  return "?";
}

struct LpRow {
  std::vector<double> coeffs;
  Relation relation = Relation::le;
  double rhs = 0.0;
  std::string label;
};

struct LinearProgram {
  std::size_t n_vars = 0;
  std::vector<double> objective;
  bool maximize = false;
  std::vector<LpRow> rows;

  void add_row(std::vector<double> coeffs, Relation rel, double rhs, std::string label = {}) {
    if (coeffs.size() != n_vars) throw std::invalid_argument("row has wrong number of coefficients");
    rows.push_back({std::move(coeffs), rel, rhs, std::move(label)});
  }
};

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  double objective = 0.0;
  std::vector<double> x;
  std::vector<double> slack;  // rhs - activity for le, activity - rhs for ge, 0 for eq
  std::size_t pivots = 0;
};

namespace detail {

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), a_((rows + 1) * (cols + 1), 0.0) {}

  double& at(std::size_t r, std::size_t c) { return a_[r * (n_ + 1) + c]; }
  double at(std::size_t r, std::size_t c) const { return a_[r * (n_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, n_); }
  double& cost(std::size_t c) { return at(m_, c); }  // reduced cost row
  double& value() { return at(m_, n_); }              // minus objective value

  void pivot(std::size_t r, std::size_t c) {
    const double p = at(r, c);
    for (std::size_t j = 0; j <= n_; ++j) at(r, j) /= p;
    at(r, c) = 1.0;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = at(i, c);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= n_; ++j) at(i, j) -= f * at(r, j);
      at(i, c) = 0.0;
    }
  }

  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }

 private:
  std::size_t m_, n_;
  std::vector<double> a_;
};

}  // namespace detail

inline constexpr double kLpTolerance = 1e-9;

/// Solves `lp` to optimality or reports infeasible / unbounded.
inline LpSolution solve_lp(const LinearProgram& lp, std::size_t max_pivots = 100000) {
  const std::size_t n = lp.n_vars;
  const std::size_t m = lp.rows.size();
  if (lp.objective.size() != n) throw std::invalid_argument("objective has wrong length");
  constexpr double tol = kLpTolerance;
  constexpr double piv_tol = 1e-12;

  // Column layout: structural | slack/surplus | artificial.
  std::size_t n_slack = 0;
  for (const auto& r : lp.rows) n_slack += (r.relation != Relation::eq);
  std::size_t n_art = 0;
  std::vector<int> sign(m, 1);
  for (std::size_t i = 0; i < m; ++i) {
    sign[i] = lp.rows[i].rhs < 0.0 ? -1 : 1;
    const Relation rel = lp.rows[i].relation;
    const bool slack_is_basis = (rel == Relation::le && sign[i] > 0) || (rel == Relation::ge && sign[i] < 0);
    if (!slack_is_basis) ++n_art;
  }
  const std::size_t cols = n + n_slack + n_art;
  detail::Tableau tab(m, cols);
  std::vector<std::size_t> basis(m);
  std::vector<bool> artificial(cols, false);

  std::size_t s = n, art = n + n_slack;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& row = lp.rows[i];
    for (std::size_t j = 0; j < n; ++j) tab.at(i, j) = sign[i] * row.coeffs[j];
    tab.rhs(i) = sign[i] * row.rhs;
    bool has_basis = false;
    if (row.relation != Relation::eq) {
      const double coef = (row.relation == Relation::le ? 1.0 : -1.0) * sign[i];
      tab.at(i, s) = coef;
      if (coef > 0.0) {
        basis[i] = s;
        has_basis = true;
      }
      ++s;
    }
    if (!has_basis) {
      tab.at(i, art) = 1.0;
      artificial[art] = true;
      basis[i] = art++;
    }
  }

  LpSolution sol;
  auto run = [&](std::vector<bool> const& allowed) -> LpStatus {
    while (true) {
      std::size_t enter = cols;
      for (std::size_t j = 0; j < cols; ++j) {
        if (allowed[j] && tab.cost(j) < -tol) {
          enter = j;
          break;
        }
      }
      if (enter == cols) return LpStatus::optimal;
      std::size_t leave = m;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) {
        const double a = tab.at(i, enter);
        if (a <= piv_tol) continue;
        const double ratio = tab.rhs(i) / a;
        if (ratio < best - 1e-15 || (std::abs(ratio - best) <= 1e-15 && basis[i] < basis[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave == m) return LpStatus::unbounded;
      tab.pivot(leave, enter);
      basis[leave] = enter;
      if (++sol.pivots > max_pivots) throw std::runtime_error("simplex pivot limit exceeded");
    }
  };

  // Phase 1: minimize the sum of artificials.
  if (n_art > 0) {
    for (std::size_t i = 0; i < m; ++i) {
      if (!artificial[basis[i]]) continue;
      for (std::size_t j = 0; j <= cols; ++j) {
        if (j < cols && artificial[j]) continue;
        tab.at(m, j) -= tab.at(i, j);
      }
    }
    std::vector<bool> all(cols, true);
    run(all);
    if (-tab.value() > tol * std::max(1.0, static_cast<double>(m))) {
      sol.status = LpStatus::infeasible;
      return sol;
    }
    // Drive remaining (zero-level) artificials out of the basis where possible.
    for (std::size_t i = 0; i < m; ++i) {
      if (!artificial[basis[i]]) continue;
      for (std::size_t j = 0; j < n + n_slack; ++j) {
        if (std::abs(tab.at(i, j)) > piv_tol) {
          tab.pivot(i, j);
          basis[i] = j;
          break;
        }
      }
    }
  }

  // Phase 2 objective expressed in reduced form.
  const double dir = lp.maximize ? -1.0 : 1.0;
  for (std::size_t j = 0; j <= cols; ++j) tab.cost(j) = 0.0;
  for (std::size_t j = 0; j < n; ++j) tab.cost(j) = dir * lp.objective[j];
  for (std::size_t i = 0; i < m; ++i) {
    const double cb = tab.cost(basis[i]);
    if (cb == 0.0) continue;
    for (std::size_t j = 0; j <= cols; ++j) tab.at(m, j) -= cb * tab.at(i, j);
  }
  std::vector<bool> allowed(cols, true);
  for (std::size_t j = 0; j < cols; ++j) allowed[j] = !artificial[j];
  if (run(allowed) == LpStatus::unbounded) {
    sol.status = LpStatus::unbounded;
    return sol;
  }

  sol.status = LpStatus::optimal;
  sol.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] < n) sol.x[basis[i]] = std::max(0.0, tab.rhs(i));
  sol.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) sol.objective += lp.objective[j] * sol.x[j];
  sol.slack.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    double act = 0.0;
    for (std::size_t j = 0; j < n; ++j) act += lp.rows[i].coeffs[j] * sol.x[j];
    switch (lp.rows[i].relation) {
      case Relation::le: sol.slack[i] = lp.rows[i].rhs - act; break;
      case Relation::ge: sol.slack[i] = act - lp.rows[i].rhs; break;
      case Relation::eq: sol.slack[i] = 0.0; break;
    }
  }
  return sol;
}

}  // namespace qnet
