#include <gtest/gtest.h>

#include <sstream>

#include "regimesim/experiment.hpp"

using namespace regimesim;
using namespace regimesim::experiment;
using nlohmann::json;

namespace {

ScenarioConfig small_scenario() {
  ScenarioConfig cfg;
  cfg.parent.quantity = 600;
  cfg.parent.time_limit = 1800;
  cfg.parent.period = 60;
  cfg.parent.aggregation = 5;
  cfg.population.value_agents = 10;
  cfg.population.noise_agents = 30;
  cfg.population.noise.wake_rate = 1.0 / 120.0;
  cfg.population.momentum_agents = 2;
  cfg.warmup = 120;
  cfg.n_seeds = 2;
  return cfg;
}

}  // namespace

TEST(Config, JsonRoundTrip) {
  auto cfg = small_scenario();
  cfg.seeds = {4, 9};
  cfg.fundamental.initial_regime = 1;
  cfg.strategies = {execution::Strategy::RegimeAware1, execution::Strategy::FullMarket};
  const json j = to_json(cfg);
  const auto back = scenario_from_json(j);
  EXPECT_EQ(to_json(back), j);
  EXPECT_EQ(back.seed_list(), (std::vector<std::uint64_t>{4, 9}));
  EXPECT_EQ(back.strategies.front(), execution::Strategy::RegimeAware1);
  EXPECT_EQ(config_hash(j), config_hash(to_json(back)));
}

TEST(Config, DefaultsDescribeTheReferenceScenario) {
  const auto cfg = scenario_from_json(json::object());
  EXPECT_EQ(cfg.parent.quantity, 20000);
  EXPECT_EQ(cfg.parent.time_limit, 82800.0);
  EXPECT_EQ(cfg.parent.period, 60.0);
  EXPECT_EQ(cfg.parent.aggregation, 10);
  EXPECT_EQ(cfg.strategies.size(), 4u);
  EXPECT_EQ(cfg.seed_list().size(), 20u);
  EXPECT_NEAR(cfg.fundamental.rates[0][0] * 86400.0, 2.90, 0.005);
  EXPECT_NEAR(cfg.fundamental.rates[0][1] * 86400.0, 0.812, 0.001);
  EXPECT_FALSE(cfg.fundamental.initial_regime.has_value());
}

TEST(Config, RatesPerDayAreConverted) {
  const auto cfg = scenario_from_json(
      json{{"fundamental", {{"rates_per_day", {{2.0, 0.5}, {0.5, 2.0}}}}}});
  EXPECT_DOUBLE_EQ(cfg.fundamental.rates[0][1], 0.5 / 86400.0);
}

TEST(Config, ReportsMistakes) {
  EXPECT_THROW(scenario_from_json(json{{"fundamentals", json::object()}}), ConfigError);
  EXPECT_THROW(scenario_from_json(json{{"population", {{"noise", {{"cnt", 3}}}}}}), ConfigError);
  EXPECT_THROW(scenario_from_json(json{{"strategies", {"twap"}}}), ConfigError);
  EXPECT_THROW(scenario_from_json(json{{"parent_order", {{"side", "sell"}}}}), ConfigError);
  EXPECT_THROW(scenario_from_json(json{{"parent_order", {{"quantity", "many"}}}}), ConfigError);
  EXPECT_THROW(scenario_from_json(json{{"fundamental", {{"initial_regime", 5}}}}), ConfigError);
  EXPECT_THROW(scenario_from_json(json{{"fundamental", {{"rates_per_day", {{1.0}, {1.0}}}}}}),
               ConfigError);
  EXPECT_THROW(load_scenario("/nonexistent/config.json"), ConfigError);
}

TEST(Config, CalibrationSettingsRoundTrip) {
  const json j{{"trials", 7},
               {"seed", 3},
               {"search", {{"method", "exact"}, {"n_days", 50}}},
               {"label", {{"short_window", 30}, {"long_window", 90}}}};
  const auto cfg = calibration_from_json(j);
  EXPECT_EQ(cfg.trials, 7u);
  EXPECT_EQ(cfg.search.method, calibration::CountMethod::Exact);
  EXPECT_EQ(cfg.search.day.label.long_window, 90u);
  EXPECT_EQ(to_json(calibration_from_json(to_json(cfg))), to_json(cfg));
  EXPECT_THROW(calibration_from_json(json{{"trails", 7}}), ConfigError);
}

TEST(Hash, KnownFnvValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(config_hash(json::object()).size(), 16u);
}

TEST(Switches, CountsOnlyChangesInsideWindow) {
  sde::RegimeTrace t;
  t.events = {{0.0, {0}}, {5.0, {0}}, {10.0, {1}}, {20.0, {0}}, {30.0, {1}}};
  EXPECT_EQ(switches_between(t, 0.0, 100.0), 3u);
  EXPECT_EQ(switches_between(t, 10.0, 30.0), 2u);
  EXPECT_EQ(switches_between(t, 0.0, 9.0), 0u);
}

TEST(Episode, DeterministicAndSharesTheFundamental) {
  const auto cfg = small_scenario();
  const auto a = run_episode(cfg, 3, execution::Strategy::RegimeAware0);
  const auto b = run_episode(cfg, 3, execution::Strategy::RegimeAware0);
  ASSERT_FALSE(a.failed) << a.error;
  EXPECT_EQ(a.placements, b.placements);
  EXPECT_EQ(a.events_processed, b.events_processed);
  EXPECT_EQ(a.metrics.pct_comp, b.metrics.pct_comp);
  ASSERT_TRUE(a.arrival_mid.has_value());
  EXPECT_EQ(a.placements.size(), 30u);

  const auto mo = run_episode(cfg, 3, execution::Strategy::FullMarket);
  EXPECT_EQ(mo.regime_switch_count, a.regime_switch_count);
  for (std::size_t i = 0; i < a.placements.size(); ++i) {
    EXPECT_EQ(a.placements[i].upward, mo.placements[i].upward);
  }
  EXPECT_GT(mo.metrics.pct_comp, 0.99);
}

TEST(Experiment, OrderedByStrategyThenSeed) {
  auto cfg = small_scenario();
  cfg.strategies = {execution::Strategy::FullLimit, execution::Strategy::FullMarket};
  const auto results = run_experiment(cfg, 2);
  ASSERT_EQ(results.size(), 4u);
  EXPECT_EQ(results[0].strategy, execution::Strategy::FullLimit);
  EXPECT_EQ(results[1].seed, 2u);
  EXPECT_EQ(results[2].strategy, execution::Strategy::FullMarket);
  const auto serial = run_experiment(cfg, 1);
  for (std::size_t i = 0; i < results.size(); ++i) {
    EXPECT_EQ(results[i].metrics.wapr, serial[i].metrics.wapr);
  }
}

TEST(ResultsTable, CsvRoundTripAndSummary) {
  std::vector<ResultRow> rows(4);
  rows[0] = {1, "full_MO", 1.0, 101.0, 1.01, 3, 2, false};
  rows[1] = {2, "full_MO", 1.0, 103.0, 1.03, 4, 0, false};
  rows[2] = {1, "full_LO", 0.0, std::nullopt, std::nullopt, 0, 2, false};
  rows[3] = {2, "full_LO", 0.0, std::nullopt, std::nullopt, 0, 0, true};
  std::stringstream ss;
  write_results_csv(ss, rows);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')),
            "seed,strategy,pct_comp,wapr,normalized_price,n_fills,regime_switch_count,status");
  const auto back = read_results_csv(ss);
  ASSERT_EQ(back.size(), 4u);
  EXPECT_EQ(back[1].wapr, 103.0);
  EXPECT_FALSE(back[2].wapr.has_value());
  EXPECT_TRUE(back[3].failed);

  const auto summary = summarize(back);
  ASSERT_EQ(summary.size(), 2u);
  EXPECT_EQ(summary[0].strategy, "full_MO");
  EXPECT_DOUBLE_EQ(*summary[0].mean_wapr, 102.0);
  EXPECT_DOUBLE_EQ(*summary[0].mean_normalized_price, 1.02);
  EXPECT_EQ(summary[1].strategy, "full_LO");
  EXPECT_EQ(summary[1].failed, 1u);
  EXPECT_FALSE(summary[1].mean_normalized_price.has_value());

  std::ostringstream table;
  write_summary_table(table, summary);
  EXPECT_NE(table.str().find("1.020000"), std::string::npos);
  std::ostringstream empty;
  write_summary_table(empty, {});
  EXPECT_EQ(empty.str().find("strategy"), 0u);
}

TEST(ResultsTable, RejectsBrokenFiles) {
  std::istringstream none("");
  EXPECT_THROW(read_results_csv(none), std::runtime_error);
  std::istringstream missing("seed,strategy\n1,full_MO\n");
  EXPECT_THROW(read_results_csv(missing), std::runtime_error);
  std::istringstream bad("seed,strategy,pct_comp,wapr,normalized_price\n1,full_MO,x,1,1\n");
  EXPECT_THROW(read_results_csv(bad), std::runtime_error);
}
