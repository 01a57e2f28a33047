#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "regimesim/sde.hpp"

using namespace regimesim;
using namespace regimesim::sde;

namespace {

const std::vector<RegimeParams> kTwoRegimes{{1.0, 10.0, 2.0}, {1.0, -10.0, 2.0}};

CtmstouParams two_regime(double stay, double sw) {
  return CtmstouParams{kTwoRegimes, RateMatrix::symmetric_two_state(stay, sw), 10000.0, 10000.0,
                       RegimeState{0}};
}

}  // namespace

TEST(RateMatrix, RejectsMalformedInput) {
  EXPECT_THROW(RateMatrix({{1.0, 2.0}, {3.0}}), std::invalid_argument);
  EXPECT_THROW(RateMatrix({{1.0, -0.1}, {0.0, 1.0}}), std::invalid_argument);
  EXPECT_THROW(RateMatrix(std::vector<std::vector<double>>{}), std::invalid_argument);
}

TEST(RateMatrix, TotalAndSwitchRates) {
  const RateMatrix m({{0.5, 0.2}, {0.1, 0.3}});
  EXPECT_DOUBLE_EQ(m.total_rate(0), 0.7);
  EXPECT_DOUBLE_EQ(m.switch_rate(0), 0.2);
  EXPECT_DOUBLE_EQ(m.total_rate(1), 0.4);
  EXPECT_DOUBLE_EQ(m.switch_rate(1), 0.1);
  EXPECT_EQ(m.rows(), (std::vector<std::vector<double>>{{0.5, 0.2}, {0.1, 0.3}}));
}

TEST(Grid, StepCountAndTimes) {
  EXPECT_EQ(step_count(10.0, 1.0), 10u);
  EXPECT_EQ(step_count(1.0, 0.1), 10u);
  EXPECT_EQ(step_count(1.05, 0.1), 10u);
  const auto g = time_grid(2.0, 0.5);
  EXPECT_EQ(g, (std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0}));
  EXPECT_THROW(step_count(1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(step_count(-1.0, 0.1), std::invalid_argument);
}

TEST(CtmcTrace, StartsAtInitialStateAndStaysInsideHorizon) {
  Rng rng = make_rng(3, Stream::Regime);
  const auto rates = RateMatrix::symmetric_two_state(0.5, 0.2);
  const auto trace = ctmc_sample_trace(rates, RegimeState{1}, 500.0, rng);
  ASSERT_FALSE(trace.events.empty());
  EXPECT_EQ(trace.events.front().time, 0.0);
  EXPECT_EQ(trace.events.front().state.index, 1u);
  for (std::size_t i = 1; i < trace.events.size(); ++i) {
    EXPECT_GT(trace.events[i].time, trace.events[i - 1].time);
    EXPECT_LT(trace.events[i].time, 500.0);
  }
  // 0.7 events/s over 500 s: a few hundred events, some of them self-transitions.
  EXPECT_GT(trace.events.size(), 250u);
  EXPECT_LT(trace.switch_count(), trace.events.size() - 1);
}

TEST(CtmcTrace, ZeroRatesAreAbsorbing) {
  Rng rng(1);
  const auto trace =
      ctmc_sample_trace(RateMatrix::symmetric_two_state(0.0, 0.0), RegimeState{0}, 1e6, rng);
  ASSERT_EQ(trace.events.size(), 1u);
  EXPECT_EQ(trace.switch_count(), 0u);
}

TEST(CtmcTrace, SelfTransitionsOnlyNeverChangeLabel) {
  Rng rng(2);
  const auto trace =
      ctmc_sample_trace(RateMatrix::symmetric_two_state(1.0, 0.0), RegimeState{1}, 100.0, rng);
  EXPECT_GT(trace.events.size(), 50u);
  EXPECT_EQ(trace.switch_count(), 0u);
  for (const auto& e : trace.events) EXPECT_EQ(e.state.index, 1u);
}

TEST(CtmcTrace, DimensionMismatchIsRejected) {
  Rng rng(1);
  EXPECT_THROW(ctmc_sample_trace(RateMatrix::symmetric_two_state(1, 1), RegimeState{2}, 10.0, rng),
               std::invalid_argument);
  CtmstouParams p = two_regime(1.0, 1.0);
  p.regimes.pop_back();
  EXPECT_THROW(generate_ctmstou_path(p, 10.0, 1.0, 1), std::invalid_argument);
}

TEST(RegimeTrace, StateAtUsesLastEventAtOrBefore) {
  RegimeTrace t{{{0.0, {0}}, {2.5, {1}}, {4.0, {0}}}};
  EXPECT_EQ(t.state_at(0.0).index, 0u);
  EXPECT_EQ(t.state_at(2.49).index, 0u);
  EXPECT_EQ(t.state_at(2.5).index, 1u);
  EXPECT_EQ(t.state_at(3.9).index, 1u);
  EXPECT_EQ(t.state_at(100.0).index, 0u);
  EXPECT_EQ(t.switch_count(), 2u);
}

TEST(Center, PiecewiseLinearWithKnownBreaks) {
  // Slopes +10 on [0, 2.5), -10 on [2.5, 4), +10 afterwards.
  RegimeTrace t{{{0.0, {0}}, {2.5, {1}}, {4.0, {0}}}};
  EXPECT_DOUBLE_EQ(center_at(t, kTwoRegimes, 100.0, 0.0), 100.0);
  EXPECT_DOUBLE_EQ(center_at(t, kTwoRegimes, 100.0, 2.5), 125.0);
  EXPECT_DOUBLE_EQ(center_at(t, kTwoRegimes, 100.0, 4.0), 110.0);
  EXPECT_DOUBLE_EQ(center_at(t, kTwoRegimes, 100.0, 5.0), 120.0);
  const auto grid = time_grid(5.0, 1.0);
  const auto m = center_series(t, kTwoRegimes, 100.0, grid);
  EXPECT_EQ(m, (std::vector<double>{100, 110, 120, 120, 110, 120}));
}

TEST(Center, MatchesExactRationalIntegration) {
  // Event times on a 1/8 grid and integer slopes keep every double operation
  // exact, so the result must equal integer arithmetic in units of 1/8.
  Rng rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<RegimeParams> regimes{{0, 3, 0}, {0, -5, 0}, {0, 7, 0}};
    RegimeTrace trace;
    trace.events.push_back({0.0, {0}});
    std::int64_t eighths = 0;
    std::uniform_int_distribution<int> gap(1, 40), st(0, 2);
    while (true) {
      eighths += gap(rng);
      if (eighths >= 8 * 64) break;
      trace.events.push_back({eighths / 8.0, {static_cast<std::uint32_t>(st(rng))}});
    }
    const auto grid = time_grid(64.0, 0.125);
    const auto m = center_series(trace, regimes, 1000.0, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const std::int64_t t8 = static_cast<std::int64_t>(i);
      std::int64_t acc8 = 1000 * 8;
      for (std::size_t k = 0; k < trace.events.size(); ++k) {
        const std::int64_t a = static_cast<std::int64_t>(trace.events[k].time * 8);
        if (a >= t8) break;
        const std::int64_t b = k + 1 < trace.events.size()
                                   ? std::min<std::int64_t>(t8, static_cast<std::int64_t>(trace.events[k + 1].time * 8))
                                   : t8;
        acc8 += static_cast<std::int64_t>(regimes[trace.events[k].state.index].mu) * (b - a);
      }
      ASSERT_EQ(m[i], static_cast<double>(acc8) / 8.0) << "rep " << rep << " i " << i;
    }
  }
}

TEST(Ctmstou, SwitchTakesEffectAtFirstGridPointAtOrAfterIt) {
  auto p = two_regime(0.0, 0.0);
  RegimeTrace t{{{0.0, {0}}, {2.5, {1}}}};
  const auto path = generate_ctmstou_path(p, t, 5.0, 1.0, 7);
  ASSERT_EQ(path.states.size(), 6u);
  EXPECT_EQ(path.states[2].index, 0u);
  EXPECT_EQ(path.states[3].index, 1u);
  // The center itself bends exactly at 2.5, between grid points.
  EXPECT_DOUBLE_EQ(path.centers[3], 10000.0 + 25.0 - 5.0);
}

TEST(Ctmstou, ZeroSigmaFollowsDeterministicRecursion) {
  CtmstouParams p{{{0.5, 2.0, 0.0}, {0.5, -1.0, 0.0}},
                  RateMatrix::symmetric_two_state(0.0, 0.05), 50.0, 40.0, RegimeState{0}};
  const auto path = generate_ctmstou_path(p, 200.0, 0.5, 9);
  double x = 50.0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    ASSERT_EQ(path.values[i], x);
    const double m = center_at(path.trace, p.regimes, p.m0, path.time_at(i));
    x = x + p.regimes[path.states[i].index].theta * (m - x) * 0.5;
  }
}

TEST(Ctmstou, DeterministicPerSeed) {
  const auto p = two_regime(1.0 / 7200, 1.0 / 18000);
  const auto a = generate_ctmstou_path(p, 3600.0, 1.0, 42);
  const auto b = generate_ctmstou_path(p, 3600.0, 1.0, 42);
  const auto c = generate_ctmstou_path(p, 3600.0, 1.0, 43);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.centers, b.centers);
  EXPECT_NE(a.values, c.values);
}

TEST(Reductions, TrendingOuWithZeroTrendIsOu) {
  const auto ou = generate_ou_path(0.3, 5.0, 1.5, 2.0, 100.0, 0.25, 17);
  const auto tou = generate_tou_path(0.3, 5.0, 0.0, 1.5, 2.0, 100.0, 0.25, 17);
  EXPECT_EQ(ou, tou);
}

TEST(Reductions, ConstantCenterFouIsOu) {
  const auto ou = generate_ou_path(0.3, 5.0, 1.5, 2.0, 100.0, 0.25, 17);
  const auto fou = generate_fou_path(0.3, [](double) { return 5.0; }, 1.5, 2.0, 100.0, 0.25, 17);
  EXPECT_EQ(ou, fou);
}

TEST(Reductions, SingleFlatRegimeCtmstouIsOu) {
  CtmstouParams p{{{1.0, 0.0, 2.0}}, RateMatrix(std::vector<std::vector<double>>{{1e-3}}), 10000.0, 10000.0, RegimeState{0}};
  const auto path = generate_ctmstou_path(p, 500.0, 1.0, 5);
  const auto ou = generate_ou_path(1.0, 10000.0, 2.0, 10000.0, 500.0, 1.0, 5);
  EXPECT_EQ(path.values, ou);
}

TEST(Reductions, TrendingOuTracksDetrendedOu) {
  // X_t - trend*t behaves as an OU around mu; with sigma = 0 it is exact.
  const auto tou = generate_tou_path(0.2, 0.0, 1.0, 0.0, 0.0, 50.0, 0.5, 1);
  const auto ou = generate_ou_path(0.2, 0.0, 0.0, 0.0, 50.0, 0.5, 1);
  for (std::size_t i = 0; i < tou.size(); ++i) EXPECT_DOUBLE_EQ(tou[i] - 0.5 * i, ou[i]);
}

TEST(OuMoments, ShortRunVarianceAndMean) {
  // Exact AR(1) discretisation variance for Euler: sigma^2 dt / (1 - (1 - theta dt)^2).
  const double theta = 0.5, sigma = 1.0, dt = 0.1;
  const auto x = generate_ou_path(theta, 3.0, sigma, 3.0, 40000.0, dt, 99);
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(x.size() - 1);
  const double a = 1.0 - theta * dt;
  const double expected = sigma * sigma * dt / (1.0 - a * a);
  EXPECT_NEAR(var, expected, 0.05 * expected);
  EXPECT_NEAR(mean, 3.0, 0.05);
}

TEST(Gbm, ExactAndEulerShareIncrements) {
  const auto exact = gbm_exact_path(1.0, 0.05, 0.3, 1.0, 1e-4, 8);
  const auto euler = gbm_euler_path(1.0, 0.05, 0.3, 1.0, 1e-4, 8);
  ASSERT_EQ(exact.size(), euler.size());
  EXPECT_NEAR(exact.back(), euler.back(), 5e-3);
  for (double v : exact) EXPECT_GT(v, 0.0);
}

TEST(Gbm, ZeroVolatilityIsExponentialGrowth) {
  const auto exact = gbm_exact_path(2.0, 0.1, 0.0, 10.0, 1.0, 1);
  EXPECT_NEAR(exact.back(), 2.0 * std::exp(1.0), 1e-12);
  const auto euler = gbm_euler_path(2.0, 0.1, 0.0, 10.0, 1.0, 1);
  EXPECT_NEAR(euler.back(), 2.0 * std::pow(1.1, 10), 1e-12);
}

TEST(EulerMaruyama, StepFormula) {
  static_assert(euler_maruyama_step(1.0, 2.0, 3.0, 0.5, 0.25) == 1.0 + 1.0 + 0.75);
  const auto x = euler_maruyama(
      1.0, [](double, double t) { return t; }, [](double, double) { return 0.0; }, 3.0, 1.0, 0);
  EXPECT_EQ(x, (std::vector<double>{1.0, 1.0, 2.0, 4.0}));
}
