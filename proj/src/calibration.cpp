#include "regimesim/calibration.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "regimesim/random.hpp"

namespace regimesim::calibration {

OhlcParseError::OhlcParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (std::isspace(static_cast<unsigned char>(s.front())) || s.front() == '"'))
    s.remove_prefix(1);
  while (!s.empty() && (std::isspace(static_cast<unsigned char>(s.back())) || s.back() == '"'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_number(std::string_view field, std::size_t line, const char* column) {
  // std::from_chars for double is not available on every toolchain we target.
  std::string buf(field);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size() || !std::isfinite(v)) {
    throw OhlcParseError(line, std::string("invalid ") + column + " value '" + buf + "'");
  }
  return v;
}

// Days since 1970-01-01 to civil date.
std::string civil_date(std::int64_t epoch_seconds) {
  std::int64_t z = epoch_seconds >= 0 ? epoch_seconds / 86400 : (epoch_seconds - 86399) / 86400;
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04lld-%02u-%02u", static_cast<long long>(y + (m <= 2)), m, d);
  return buf;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

struct RawRow {
  std::size_t line;
  OhlcBar bar;
};

}  // namespace

std::string OhlcDay::date() const { return civil_date(day_start); }

std::vector<double> OhlcDay::opens() const {
  std::vector<double> out;
  out.reserve(bars.size());
  for (const auto& b : bars) out.push_back(static_cast<double>(b.open));
  return out;
}

OhlcDataset parse_ohlc_csv(std::istream& in, const OhlcLoadOptions& options) {
  if (options.bar_seconds <= 0) throw std::invalid_argument("bar_seconds must be positive");
  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, std::size_t> columns;

  // Header: first line naming all required columns. Preamble lines before it
  // (e.g. a source URL) are skipped.
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_csv(line);
    std::map<std::string, std::size_t> found;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const auto name = lowercase(fields[i]);
      if (name == "timestamp" || name == "unix" || name == "unix timestamp") {
        found.emplace("timestamp", i);
      } else if (name == "open" || name == "high" || name == "low" || name == "close") {
        found.emplace(name, i);
      } else if (name.rfind("volume", 0) == 0) {
        found.emplace("volume", i);
      }
    }
    if (found.contains("timestamp") && found.contains("open") && found.contains("high") &&
        found.contains("low") && found.contains("close")) {
      columns = std::move(found);
      break;
    }
    if (line_no >= 5) break;
  }
  if (columns.empty()) {
    throw OhlcParseError(line_no, "missing header with timestamp, open, high, low, close columns");
  }

  std::vector<RawRow> rows;
  const auto to_cents = [&](double v) {
    return static_cast<Price>(std::llround(v * options.price_scale));
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    const auto get = [&](const char* name) -> std::string_view {
      const std::size_t idx = columns.at(name);
      if (idx >= fields.size()) throw OhlcParseError(line_no, std::string("missing ") + name);
      return fields[idx];
    };
    OhlcBar bar;
    double ts = parse_number(get("timestamp"), line_no, "timestamp");
    if (ts > 1e11) ts /= 1000.0;
    bar.timestamp = static_cast<std::int64_t>(std::llround(ts));
    bar.open = to_cents(parse_number(get("open"), line_no, "open"));
    bar.high = to_cents(parse_number(get("high"), line_no, "high"));
    bar.low = to_cents(parse_number(get("low"), line_no, "low"));
    bar.close = to_cents(parse_number(get("close"), line_no, "close"));
    if (columns.contains("volume")) bar.volume = parse_number(get("volume"), line_no, "volume");
    if (bar.low > bar.high || bar.open < bar.low || bar.open > bar.high || bar.close < bar.low ||
        bar.close > bar.high) {
      throw OhlcParseError(line_no, "inconsistent bar: requires low <= open, close <= high");
    }
    rows.push_back({line_no, bar});
  }

  if (rows.size() >= 2 && rows.front().bar.timestamp > rows.back().bar.timestamp) {
    std::reverse(rows.begin(), rows.end());
  }
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].bar.timestamp <= rows[i - 1].bar.timestamp) {
      throw OhlcParseError(rows[i].line, "timestamps must be strictly monotonic");
    }
  }

  OhlcDataset out;
  const std::int64_t expected = static_cast<std::int64_t>(kSecondsPerDay) / options.bar_seconds;
  std::size_t i = 0;
  while (i < rows.size()) {
    const std::int64_t day =
        floor_div(rows[i].bar.timestamp - options.day_offset_seconds, 86400);
    OhlcDay d;
    d.day_start = day * 86400 + options.day_offset_seconds;
    while (i < rows.size() &&
           floor_div(rows[i].bar.timestamp - options.day_offset_seconds, 86400) == day) {
      d.bars.push_back(rows[i].bar);
      ++i;
    }
    const double missing =
        1.0 - static_cast<double>(d.bars.size()) / static_cast<double>(expected);
    if (missing > options.max_missing_fraction) {
      out.excluded.push_back({d.day_start, d.bars.size(),
                              "missing " + std::to_string(static_cast<int>(std::lround(missing * 100))) +
                                  "% of bars"});
    } else {
      out.days.push_back(std::move(d));
    }
  }
  return out;
}

OhlcDataset load_ohlc_csv(const std::filesystem::path& path, const OhlcLoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_ohlc_csv(in, options);
}

// ---------------------------------------------------------------------------

void LabelConfig::validate() const {
  if (short_window < 1 || !(short_window < long_window)) {
    throw std::invalid_argument("label windows require 1 <= short < long");
  }
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
}

std::vector<double> band_signal(std::span<const double> opens, const LabelConfig& cfg) {
  cfg.validate();
  const std::size_t n = opens.size();
  std::vector<double> x(n, 0.0);
  if (n == 0) return x;
  // Prefix sums of values shifted by the first open keep magnitudes small.
  const long double shift = opens[0];
  std::vector<long double> s1(n + 1, 0.0L);
  std::vector<long double> s2(n + 1, 0.0L);
  for (std::size_t i = 0; i < n; ++i) {
    const long double v = static_cast<long double>(opens[i]) - shift;
    s1[i + 1] = s1[i] + v;
    s2[i + 1] = s2[i] + v * v;
  }
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t end = t + 1;
    const std::size_t short_len = std::min(cfg.short_window, end);
    const std::size_t long_len = std::min(cfg.long_window, end);
    const long double short_sum = s1[end] - s1[end - short_len];
    const long double long_sum = s1[end] - s1[end - long_len];
    const long double short_mean = short_sum / static_cast<long double>(short_len);
    const long double long_mean = long_sum / static_cast<long double>(long_len);
    if (short_len < 2) continue;
    const long double sq = s2[end] - s2[end - short_len];
    long double var = (sq - short_sum * short_mean) / static_cast<long double>(short_len - 1);
    if (!(var > 0.0L)) continue;
    const long double sd = std::sqrt(var);
    x[t] = static_cast<double>((long_mean - short_mean) / (static_cast<long double>(cfg.alpha) * sd));
  }
  return x;
}

std::size_t label_switch_count(std::span<const double> opens, const LabelConfig& cfg) {
  const auto x = band_signal(opens, cfg);
  std::size_t n = 0;
  bool established = cfg.count_initial_entry;
  for (std::size_t t = 1; t < x.size(); ++t) {
    const double ref = x[t - 1];
    const double cur = x[t];
    if ((ref > -1.0 && cur < -1.0) || (ref < 1.0 && cur > 1.0)) {
      if (established) {
        ++n;
      } else {
        established = true;
      }
    }
  }
  return n;
}

double wasserstein_1d(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("wasserstein_1d needs non-empty samples");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  if (sa.size() == sb.size()) {
    double sum = 0.0;
    for (std::size_t i = 0; i < sa.size(); ++i) sum += std::abs(sa[i] - sb[i]);
    return sum / static_cast<double>(sa.size());
  }
  // Integrate |Qa(u) - Qb(u)| over u in [0, 1]. Quantile breakpoints are
  // i/n and j/m; in units of 1/(n*m) every segment has integer length.
  const std::uint64_t n = sa.size();
  const std::uint64_t m = sb.size();
  std::uint64_t i = 0;
  std::uint64_t j = 0;
  std::uint64_t pos = 0;
  double sum = 0.0;
  while (i < n && j < m) {
    const std::uint64_t end_a = (i + 1) * m;
    const std::uint64_t end_b = (j + 1) * n;
    const std::uint64_t next = std::min(end_a, end_b);
    sum += std::abs(sa[i] - sb[j]) * static_cast<double>(next - pos);
    pos = next;
    if (next == end_a) ++i;
    if (next == end_b) ++j;
  }
  return sum / (static_cast<double>(n) * static_cast<double>(m));
}

// ---------------------------------------------------------------------------

std::vector<double> SwitchCountDistribution::as_doubles() const {
  return {counts.begin(), counts.end()};
}

double SwitchCountDistribution::mean() const {
  if (counts.empty()) return 0.0;
  double s = 0.0;
  for (auto c : counts) s += static_cast<double>(c);
  return s / static_cast<double>(counts.size());
}

std::string_view to_string(CountMethod m) {
  return m == CountMethod::Labeled ? "labeled" : "exact";
}

CountMethod parse_count_method(std::string_view name) {
  const auto lower = lowercase(name);
  if (lower == "labeled") return CountMethod::Labeled;
  if (lower == "exact") return CountMethod::Exact;
  throw std::invalid_argument("unknown count method '" + std::string(name) + "'");
}

namespace {

std::size_t simulate_day(const sde::RateMatrix& rates, CountMethod method, std::uint64_t day_seed,
                         const DaySimConfig& day) {
  sde::RegimeState s0{0};
  if (day.random_initial_regime && day.regimes.size() > 1) {
    Rng pick = make_rng(day_seed, Stream::InitialRegime);
    s0.index = static_cast<std::uint32_t>(
        std::uniform_int_distribution<std::size_t>(0, day.regimes.size() - 1)(pick));
  }
  if (method == CountMethod::Exact) {
    Rng rng = make_rng(day_seed, Stream::Regime);
    return sde::ctmc_sample_trace(rates, s0, day.day_seconds, rng).switch_count();
  }
  sde::CtmstouParams params{day.regimes, rates, day.x0, day.m0, s0};
  const auto path = sde::generate_ctmstou_path(params, day.day_seconds, day.dt, day_seed);
  const auto stride = static_cast<std::size_t>(std::llround(day.bar_seconds / day.dt));
  if (stride == 0) throw std::invalid_argument("bar interval must be at least one Euler step");
  std::vector<double> opens;
  opens.reserve(path.size() / stride + 1);
  // Bar k opens at k*bar_seconds; the final grid point closes the day.
  for (std::size_t i = 0; i + stride <= path.size(); i += stride) opens.push_back(path.values[i]);
  return label_switch_count(opens, day.label);
}

}  // namespace

SwitchCountDistribution simulate_switch_distribution(double stay, double switch_rate,
                                                     std::size_t n_days, CountMethod method,
                                                     std::uint64_t seed, const DaySimConfig& day) {
  if (day.regimes.size() != 2) {
    throw std::invalid_argument("switch-count simulation uses exactly two regimes");
  }
  const auto rates = sde::RateMatrix::symmetric_two_state(stay, switch_rate);
  SwitchCountDistribution out;
  out.counts.reserve(n_days);
  for (std::size_t d = 0; d < n_days; ++d) {
    out.counts.push_back(simulate_day(rates, method, derive_seed(seed, Stream::Day, d), day));
  }
  return out;
}

CalibrationResult calibrate_rates(const SwitchCountDistribution& real, std::size_t trials,
                                  std::uint64_t seed, const CalibrationConfig& cfg) {
  if (real.counts.empty()) throw std::invalid_argument("real distribution is empty");
  if (trials < 1) throw std::invalid_argument("at least one trial is required");
  if (!(cfg.rate_min > 0.0) || !(cfg.rate_min < cfg.rate_max)) {
    throw std::invalid_argument("search support requires 0 < rate_min < rate_max");
  }
  const std::size_t n_days = cfg.n_days == 0 ? real.counts.size() : cfg.n_days;
  const auto target = real.as_doubles();

  struct Outcome {
    TrialRecord record;
    SwitchCountDistribution simulated;
  };
  std::vector<Outcome> outcomes(trials);
  const double log_lo = std::log(cfg.rate_min);
  const double log_hi = std::log(cfg.rate_max);

  const auto run_trial = [&](std::size_t c) {
    Rng draw = make_rng(seed, Stream::Trial, c);
    std::uniform_real_distribution<double> u(log_lo, log_hi);
    const double omega = std::exp(u(draw));
    const double lambda = std::exp(u(draw));
    const std::uint64_t sim_seed = derive_seed(seed, Stream::Trial, c + (std::uint64_t{1} << 40));
    auto sim = simulate_switch_distribution(lambda, omega, n_days, cfg.method, sim_seed, cfg.day);
    const double dist = wasserstein_1d(sim.as_doubles(), target);
    outcomes[c] = Outcome{{lambda, omega, dist}, std::move(sim)};
  };

  unsigned workers = cfg.threads != 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, trials));
  if (workers <= 1) {
    for (std::size_t c = 0; c < trials; ++c) run_trial(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t c = next++; c < trials; c = next++) run_trial(c);
      });
    }
    for (auto& t : pool) t.join();
  }

  CalibrationResult result;
  result.trials = trials;
  result.distance = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < trials; ++c) {
    result.history.push_back(outcomes[c].record);
    if (outcomes[c].record.distance < result.distance) {
      result.distance = outcomes[c].record.distance;
      result.best_trial = c;
    }
  }
  result.stay = outcomes[result.best_trial].record.stay;
  result.switch_rate = outcomes[result.best_trial].record.switch_rate;
  result.best_simulated = std::move(outcomes[result.best_trial].simulated);
  return result;
}

}  // namespace regimesim::calibration
