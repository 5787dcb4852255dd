#include <gtest/gtest.h>

#include <vector>

#include "qnet/dpp.hpp"
#include "qnet/scenario_json.hpp"
#include "support/oracles.hpp"

using namespace qnet;

namespace {

Scenario fixture(const char* name) { return load_scenario(std::string(QNET_SCENARIO_DIR) + "/" + name + ".json"); }

}  // namespace

TEST(Dpp, ArgminMatchesBruteForce) {
  const Scenario s = fixture("downlink2");
  const CompiledScenario cs(s);
  Xoshiro256 rng(31);
  for (int i = 0; i < 10000; ++i) {
    const std::size_t w = rng.categorical(std::vector<double>(s.n_states(), 1.0 / s.n_states()));
    const std::vector<double> q{std::floor(50 * rng.uniform()), std::floor(50 * rng.uniform())};
    const std::vector<double> z{20 * rng.uniform()};
    const double V = 100 * rng.uniform();
    const std::size_t ref = oracle::brute_force_argmin(s, w, q, z, V);
    ASSERT_EQ(dpp_select_action(s, w, CompositeState(q, z), {V}), ref);
    ASSERT_EQ(cs.select(w, q, z, V), ref);
  }
}

TEST(Dpp, TiesGoToLowestIndex) {
  const Scenario s = fixture("downlink2");
  // All-zero state and V = 0: every action scores 0.
  for (std::size_t w = 0; w < s.n_states(); ++w)
    EXPECT_EQ(dpp_select_action(s, w, CompositeState(2, 1), {0.0}), 0u);
}

TEST(Dpp, ScoreIsDriftPlusPenalty) {
  const Scenario s = fixture("downlink2");
  const CompiledScenario cs(s);
  const std::vector<double> q{3, 5}, z{2};
  for (std::size_t w = 0; w < s.n_states(); ++w)
    for (std::size_t a = 0; a < s.actions[w].size(); ++a)
      EXPECT_DOUBLE_EQ(cs.score(w, a, q, z, 7.0), dpp_score(s, w, a, CompositeState(q, z), 7.0));
}

TEST(Dpp, ZeroVOnBb1IsTheBernoulliQueue) {
  const Scenario s = fixture("bb1");
  const CompiledScenario cs(s);
  for (std::uint64_t rep = 0; rep < 4; ++rep) {
    ExogenousSampler sampler(s.chain, s.arrivals, initial_distribution(s.chain), substream_seed(5, rep));
    double q = 0.0;
    std::vector<double> a(1);
    bool ok = true;
    run_dpp_path(cs, {0.0}, 5, 20000, rep, [&](const SlotView& v) {
      const std::size_t w = sampler.next_omega();
      sampler.next_arrivals(a);
      ok = ok && v.q[0] == q && v.omega == w && v.arrivals[0] == a[0];
      q = std::max(q - (w == 1 ? 1.0 : 0.0), 0.0) + a[0];
    });
    EXPECT_TRUE(ok);
  }
}

TEST(Dpp, EnsembleIndependentOfThreadCount) {
  const Scenario s = fixture("downlink2");
  const auto e1 = run_dpp_ensemble(s, {10.0}, 77, 2000, 6, 1);
  const auto e3 = run_dpp_ensemble(s, {10.0}, 77, 2000, 6, 3);
  ASSERT_EQ(e1.metrics.size(), e3.metrics.size());
  for (std::size_t r = 0; r < e1.metrics.size(); ++r) {
    EXPECT_EQ(e1.metrics[r].avg_cost, e3.metrics[r].avg_cost);
    EXPECT_EQ(e1.metrics[r].final_state, e3.metrics[r].final_state);
  }
  for (std::size_t t = 0; t < 2000; t += 97) EXPECT_EQ(e1.series[0].ensemble_mean(t), e3.series[0].ensemble_mean(t));
}

TEST(Dpp, SeriesNames) {
  const auto n = series_names(fixture("tandem3"));
  EXPECT_EQ(n, (std::vector<std::string>{"Q_1", "Q_2", "Z_1"}));
}

TEST(Dpp, VirtualQueueKeepsConstraintOnDownlink) {
  const Scenario s = fixture("downlink2");
  const auto m = run_dpp_path(CompiledScenario(s), {10.0}, 3, 200000, 0);
  EXPECT_LE(m.avg_g[0], 0.01);
  EXPECT_GE(m.avg_cost, 0.85 - 0.05);
}

TEST(Dpp, RejectsBadConfig) {
  const Scenario s = fixture("bb1");
  const CompiledScenario cs(s);
  EXPECT_THROW(run_dpp_path(cs, {-1.0}, 1, 10, 0), std::invalid_argument);
  EXPECT_THROW(run_dpp_path(cs, {1.0}, 1, 0, 0), std::invalid_argument);
  EXPECT_THROW(dpp_select_action(s, 9, CompositeState(1, 0), {1.0}), std::out_of_range);
}
