#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "regimesim/sde.hpp"
#include "regimesim/types.hpp"

namespace regimesim::calibration {

inline constexpr double kSecondsPerDay = 86400.0;

struct OhlcBar {
  std::int64_t timestamp = 0;  // epoch seconds
  Price open = 0;
  Price high = 0;
  Price low = 0;
  Price close = 0;
  double volume = 0.0;
};

struct OhlcDay {
  std::int64_t day_start = 0;  // epoch seconds of the day boundary
  std::vector<OhlcBar> bars;

  std::string date() const;  // YYYY-MM-DD of day_start
  std::vector<double> opens() const;
};

struct ExcludedDay {
  std::int64_t day_start = 0;
  std::size_t bars = 0;
  std::string reason;
};

struct OhlcLoadOptions {
  std::int64_t day_offset_seconds = 0;  // shift of the day boundary from 00:00 UTC
  std::int64_t bar_seconds = 60;
  // Days missing more than this fraction of their bars are excluded.
  double max_missing_fraction = 0.1;
  // Multiplier from file prices to integer cents.
  double price_scale = 100.0;
};

struct OhlcDataset {
  std::vector<OhlcDay> days;
  std::vector<ExcludedDay> excluded;
};

class OhlcParseError : public std::runtime_error {
 public:
  OhlcParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Header names are matched case-insensitively; extra columns are ignored.
// Timestamps above 1e11 are taken as milliseconds. A file sorted newest-first is
// reversed; any other ordering violation is an error.
OhlcDataset parse_ohlc_csv(std::istream& in, const OhlcLoadOptions& options = {});
OhlcDataset load_ohlc_csv(const std::filesystem::path& path, const OhlcLoadOptions& options = {});

struct LabelConfig {
  std::size_t short_window = 360;  // bars (minutes)
  std::size_t long_window = 720;
  double alpha = 2.0;
  // When false the first band entry of the day fixes the starting regime and
  // is not counted as a switch.
  bool count_initial_entry = false;

  void validate() const;
};

// x_t = (MA_long - MA_short) / (alpha * STD_short) with expanding windows at
// the start of the series; 0 where the short-window deviation is 0.
std::vector<double> band_signal(std::span<const double> opens, const LabelConfig& cfg);
std::size_t label_switch_count(std::span<const double> opens, const LabelConfig& cfg);

// Order-1 Wasserstein distance between two empirical distributions.
double wasserstein_1d(std::span<const double> a, std::span<const double> b);

struct SwitchCountDistribution {
  std::vector<std::size_t> counts;  // one per day

  std::vector<double> as_doubles() const;
  double mean() const;
};

enum class CountMethod : std::uint8_t { Labeled, Exact };
std::string_view to_string(CountMethod m);
CountMethod parse_count_method(std::string_view name);

// How one synthetic trading day is generated for switch counting.
struct DaySimConfig {
  std::vector<sde::RegimeParams> regimes{{1.0, 10.0, 2.0}, {1.0, -10.0, 2.0}};
  double x0 = 10000.0;
  double m0 = 10000.0;
  double day_seconds = kSecondsPerDay;
  double dt = 1.0;            // Euler step for the labeled method
  double bar_seconds = 60.0;  // open-price sampling interval
  bool random_initial_regime = true;
  LabelConfig label{};
};

// Two-state symmetric rate matrix: `stay` on the diagonal, `switch_rate` off it.
SwitchCountDistribution simulate_switch_distribution(double stay, double switch_rate,
                                                     std::size_t n_days, CountMethod method,
                                                     std::uint64_t seed,
                                                     const DaySimConfig& day = {});

struct CalibrationConfig {
  CountMethod method = CountMethod::Labeled;
  std::size_t n_days = 0;  // 0: same as the real distribution
  // Log-uniform search support for both rates, events per second.
  double rate_min = 1e-7;
  double rate_max = 1e-3;
  DaySimConfig day{};
  unsigned threads = 0;  // 0: hardware concurrency
};

struct TrialRecord {
  double stay = 0.0;
  double switch_rate = 0.0;
  double distance = 0.0;
};

struct CalibrationResult {
  double stay = 0.0;         // lambda, events/second
  double switch_rate = 0.0;  // omega, events/second
  double distance = 0.0;
  std::size_t trials = 0;
  std::size_t best_trial = 0;
  std::vector<TrialRecord> history;
  SwitchCountDistribution best_simulated;

  sde::RateMatrix rate_matrix() const {
    return sde::RateMatrix::symmetric_two_state(stay, switch_rate);
  }
};

// Random search over (lambda, omega) minimising the Wasserstein distance between
// simulated and real switch-count distributions. Trials run in parallel; ties
// resolve to the lowest trial index, so the result depends only on the seed.
CalibrationResult calibrate_rates(const SwitchCountDistribution& real, std::size_t trials,
                                  std::uint64_t seed, const CalibrationConfig& cfg = {});

}  // namespace regimesim::calibration
