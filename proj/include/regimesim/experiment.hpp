#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "regimesim/agents.hpp"
#include "regimesim/calibration.hpp"
#include "regimesim/execution.hpp"
#include "regimesim/kernel.hpp"
#include "regimesim/sde.hpp"

namespace regimesim::experiment {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FundamentalConfig {
  std::vector<sde::RegimeParams> regimes{{0.001, 0.03, 1.0}, {0.001, -0.03, 1.0}};
  std::vector<std::vector<double>> rates{{3.356e-5, 9.40e-6}, {9.40e-6, 3.356e-5}};  // per second
  double x0 = 100000.0;  // cents
  double m0 = 100000.0;
  double dt = 1.0;
  // nullopt: drawn per seed.
  std::optional<std::uint32_t> initial_regime;
  // 0: warm-up plus the parent time limit.
  double horizon = 0.0;
};

struct PopulationConfig {
  std::size_t value_agents = 100;
  ValueAgentConfig value{};
  std::size_t momentum_agents = 10;
  MomentumAgentConfig momentum{};
  std::size_t noise_agents = 500;
  NoiseAgentConfig noise{};
  std::size_t market_makers = 1;
  MarketMakerConfig market_maker{};
};

struct ScenarioConfig {
  FundamentalConfig fundamental;
  PopulationConfig population;
  execution::ParentOrder parent;
  std::vector<execution::Strategy> strategies{std::begin(execution::kAllStrategies),
                                              std::end(execution::kAllStrategies)};
  std::uint64_t base_seed = 1;
  std::size_t n_seeds = 20;
  std::vector<std::uint64_t> seeds;  // explicit list overrides base_seed/n_seeds
  double latency = 1e-6;             // seconds
  double warmup = 300.0;             // seconds of background trading before the first child
  double l1_interval = 60.0;         // seconds; 0 disables the L1 stream

  std::vector<std::uint64_t> seed_list() const;
  double simulation_horizon() const;
  sde::CtmstouParams ctmstou(std::uint32_t initial_regime) const;
  void validate() const;
};

ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioConfig& cfg);
ScenarioConfig load_scenario(const std::filesystem::path& path);

// Calibration settings for the label and calibrate subcommands.
struct CalibrationSettings {
  calibration::OhlcLoadOptions ohlc;
  calibration::CalibrationConfig search;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
};

CalibrationSettings calibration_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CalibrationSettings& cfg);

std::uint64_t fnv1a64(std::string_view bytes);
// Hash of the canonical (sorted-key, compact) JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& j);

// ---------------------------------------------------------------------------

std::uint32_t initial_regime_for(const ScenarioConfig& cfg, std::uint64_t seed);
std::shared_ptr<const sde::FundamentalPath> build_fundamental(const ScenarioConfig& cfg,
                                                              std::uint64_t seed);

struct EpisodeOptions {
  std::function<void(const EventRecord&)> event_recorder;
  std::shared_ptr<const sde::FundamentalPath> fundamental;  // reuse across strategies
};

struct EpisodeResult {
  std::uint64_t seed = 0;
  execution::Strategy strategy = execution::Strategy::FullMarket;
  execution::EpisodeMetrics metrics;
  std::size_t regime_switch_count = 0;
  std::optional<double> arrival_mid;
  std::vector<execution::Execution> fills;
  std::vector<execution::ChildPlacement> placements;
  std::vector<L1Row> l1;
  std::size_t unfilled_market_orders = 0;
  std::size_t skipped_children = 0;
  std::uint64_t events_processed = 0;
  bool failed = false;
  std::string error;
};

// One market simulation. Agents are registered exchange, oracle, market makers,
// value, momentum, noise and finally the execution agent, so the background
// agents keep their ids and RNG streams across strategies.
EpisodeResult run_episode(const ScenarioConfig& cfg, std::uint64_t seed,
                          execution::Strategy strategy, const EpisodeOptions& options = {});

// Regime changes strictly inside (start, end], times in seconds.
std::size_t switches_between(const sde::RegimeTrace& trace, double start, double end);

// Every (strategy, seed) pair, sorted by strategy order in the config then seed
// order. Failed episodes are returned with failed=true.
std::vector<EpisodeResult> run_experiment(const ScenarioConfig& cfg, unsigned threads = 0);

// ---------------------------------------------------------------------------
// Results table.

struct ResultRow {
  std::uint64_t seed = 0;
  std::string strategy;
  double pct_comp = 0.0;
  std::optional<double> wapr;
  std::optional<double> normalized_price;
  std::size_t n_fills = 0;
  std::size_t regime_switch_count = 0;
  bool failed = false;
};

ResultRow to_row(const EpisodeResult& r);
void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results_csv(std::istream& in);

struct StrategySummary {
  std::string strategy;
  std::size_t episodes = 0;
  std::size_t failed = 0;
  double mean_pct_comp = 0.0;
  std::optional<double> mean_wapr;
  std::optional<double> mean_normalized_price;
};

// Means over non-failed rows; undefined prices are skipped. Sorted by mean
// normalized price, undefined last, ties by name.
std::vector<StrategySummary> summarize(const std::vector<ResultRow>& rows);
void write_summary_table(std::ostream& out, const std::vector<StrategySummary>& summary);

// Fixed-format number used in every CSV the tools write.
std::string format_number(double v);

}  // namespace regimesim::experiment
