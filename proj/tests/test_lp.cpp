#include <gtest/gtest.h>

#include <vector>

#include "qnet/lp.hpp"
#include "qnet/rng.hpp"
#include "support/oracles.hpp"

using namespace qnet;

TEST(Lp, TwoVariableMaximum) {
  LinearProgram lp{2, {1, 1}, true, {}};
  lp.add_row({1, 2}, Relation::le, 4);
  lp.add_row({3, 1}, Relation::le, 6);
  const auto s = solve_lp(lp);
  ASSERT_EQ(s.status, LpStatus::optimal);
  EXPECT_NEAR(s.objective, 2.8, 1e-12);
  EXPECT_NEAR(s.x[0], 1.6, 1e-12);
  EXPECT_NEAR(s.x[1], 1.2, 1e-12);
}

TEST(Lp, EqualityAndGreaterRows) {
  LinearProgram lp{3, {2, 3, 1}, false, {}};
  lp.add_row({1, 1, 1}, Relation::eq, 1);
  lp.add_row({1, 0, 0}, Relation::ge, 0.25);
  lp.add_row({0, 1, 0}, Relation::ge, 0.1);
  const auto s = solve_lp(lp);
  ASSERT_EQ(s.status, LpStatus::optimal);
  EXPECT_NEAR(s.objective, 0.5 + 0.3 + 0.65, 1e-12);
  EXPECT_NEAR(s.slack[0], 0.0, 1e-12);
}

TEST(Lp, Infeasible) {
  LinearProgram lp{1, {1}, false, {}};
  lp.add_row({1}, Relation::ge, 2);
  lp.add_row({1}, Relation::le, 1);
  EXPECT_EQ(solve_lp(lp).status, LpStatus::infeasible);
}

TEST(Lp, Unbounded) {
  LinearProgram lp{2, {1, 0}, true, {}};
  lp.add_row({-1, 1}, Relation::le, 1);
  EXPECT_EQ(solve_lp(lp).status, LpStatus::unbounded);
}

TEST(Lp, DegenerateCyclingExampleTerminates) {
  // Beale's example cycles under the textbook largest-coefficient rule.
  LinearProgram lp{4, {-0.75, 150, -0.02, 6}, false, {}};
  lp.add_row({0.25, -60, -0.04, 9}, Relation::le, 0);
  lp.add_row({0.5, -90, -0.02, 3}, Relation::le, 0);
  lp.add_row({0, 0, 1, 0}, Relation::le, 1);
  const auto s = solve_lp(lp);
  ASSERT_EQ(s.status, LpStatus::optimal);
  EXPECT_NEAR(s.objective, -0.05, 1e-12);
}

TEST(Lp, RandomProgramsMatchVertexEnumeration) {
  Xoshiro256 rng(41);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 3, m = 4;
    LinearProgram lp{n, {}, false, {}};
    for (std::size_t j = 0; j < n; ++j) lp.objective.push_back(2.0 * rng.uniform() - 1.0);
    // Inequalities A x <= b plus x >= 0, all as rows of one system for the oracle.
    std::vector<std::vector<double>> A;
    std::vector<double> b;
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<double> row;
      for (std::size_t j = 0; j < n; ++j) row.push_back(2.0 * rng.uniform() - 0.5);
      const double rhs = 1.0 + 3.0 * rng.uniform();
      lp.add_row(row, Relation::le, rhs);
      A.push_back(row);
      b.push_back(rhs);
    }
    lp.add_row({1, 1, 1}, Relation::le, 10.0);
    A.push_back({1, 1, 1});
    b.push_back(10.0);
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<double> row(n, 0.0);
      row[j] = -1.0;
      A.push_back(row);
      b.push_back(0.0);
    }
    double best = 1e300;
    const std::size_t R = A.size();
    for (std::size_t i = 0; i < R; ++i)
      for (std::size_t j = i + 1; j < R; ++j)
        for (std::size_t k = j + 1; k < R; ++k) {
          std::vector<double> x;
          if (!oracle::solve_square({A[i], A[j], A[k]}, {b[i], b[j], b[k]}, x)) continue;
          bool feasible = true;
          for (std::size_t r = 0; r < R && feasible; ++r) {
            double v = 0.0;
            for (std::size_t c = 0; c < n; ++c) v += A[r][c] * x[c];
            feasible = v <= b[r] + 1e-9;
          }
          if (!feasible) continue;
          double obj = 0.0;
          for (std::size_t c = 0; c < n; ++c) obj += lp.objective[c] * x[c];
          best = std::min(best, obj);
        }
    const auto s = solve_lp(lp);
    ASSERT_EQ(s.status, LpStatus::optimal);
    ASSERT_NEAR(s.objective, best, 1e-9 * (1.0 + std::abs(best)));
  }
}
