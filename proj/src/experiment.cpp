#include "regimesim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "regimesim/random.hpp"

namespace regimesim::experiment {

using nlohmann::json;

namespace {

// Reads one JSON object, remembering which keys were consumed so that typos in
// config files are reported instead of silently ignored.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  template <class T>
  T get(const char* key, T fallback) {
    used_.insert(key);
    if (!j_.contains(key)) return fallback;
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where() + "." + key + ": " + e.what());
    }
  }

  const json& raw(const char* key) {
    used_.insert(key);
    return j_.at(key);
  }

  Section child(const char* key) {
    used_.insert(key);
    static const json empty = json::object();
    return Section(j_.contains(key) ? j_.at(key) : empty, path_ + "." + key);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!used_.contains(k)) throw ConfigError("unknown key " + where() + "." + k);
    }
  }

  std::string where() const { return path_; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

std::vector<sde::RegimeParams> parse_regimes(const json& arr, const std::string& where) {
  if (!arr.is_array() || arr.empty()) throw ConfigError(where + " must be a non-empty array");
  std::vector<sde::RegimeParams> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    Section s(arr[i], where + "[" + std::to_string(i) + "]");
    sde::RegimeParams p;
    p.theta = s.get("theta", p.theta);
    p.mu = s.get("mu", p.mu);
    p.sigma = s.get("sigma", p.sigma);
    s.finish();
    out.push_back(p);
  }
  return out;
}

json regimes_json(const std::vector<sde::RegimeParams>& regimes) {
  json arr = json::array();
  for (const auto& r : regimes) arr.push_back({{"theta", r.theta}, {"mu", r.mu}, {"sigma", r.sigma}});
  return arr;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<std::uint64_t> ScenarioConfig::seed_list() const {
  if (!seeds.empty()) return seeds;
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < n_seeds; ++i) out.push_back(base_seed + i);
  return out;
}

double ScenarioConfig::simulation_horizon() const {
  return fundamental.horizon > 0.0 ? fundamental.horizon : warmup + parent.time_limit;
}

sde::CtmstouParams ScenarioConfig::ctmstou(std::uint32_t initial_regime) const {
  return sde::CtmstouParams{fundamental.regimes, sde::RateMatrix(fundamental.rates), fundamental.x0,
                            fundamental.m0, sde::RegimeState{initial_regime}};
}

void ScenarioConfig::validate() const {
  try {
    ctmstou(fundamental.initial_regime.value_or(0)).validate();
    if (!(fundamental.dt > 0.0)) throw std::invalid_argument("fundamental dt must be positive");
    parent.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (fundamental.initial_regime && *fundamental.initial_regime >= fundamental.regimes.size()) {
    throw ConfigError("initial_regime out of range");
  }
  if (seeds.empty() && n_seeds < 1) throw ConfigError("n_seeds must be >= 1");
  if (strategies.empty()) throw ConfigError("no strategies requested");
  if (!(latency >= 0.0) || !(warmup >= 0.0) || !(l1_interval >= 0.0)) {
    throw ConfigError("latency, warmup and l1 interval must be non-negative");
  }
  if (fundamental.horizon > 0.0 && fundamental.horizon < warmup + parent.time_limit) {
    throw ConfigError("fundamental horizon shorter than warm-up plus time limit");
  }
  if (population.market_makers > 0 && population.market_maker.levels < 1) {
    throw ConfigError("market maker needs at least one level");
  }
  if (population.noise.min_size < 1 || population.noise.max_size < population.noise.min_size) {
    throw ConfigError("noise agent sizes require 1 <= min <= max");
  }
  const double rates[] = {population.value.wake_rate, population.momentum.wake_rate,
                          population.noise.wake_rate};
  for (double r : rates) {
    if (!(r > 0.0)) throw ConfigError("agent wake rates must be positive");
  }
  if (!(population.market_maker.wake_period > 0.0)) {
    throw ConfigError("market maker wake period must be positive");
  }
}

ScenarioConfig scenario_from_json(const json& j) {
  ScenarioConfig cfg;
  Section root(j, "config");

  Section seeds = root.child("seeds");
  cfg.base_seed = seeds.get("base", cfg.base_seed);
  cfg.n_seeds = seeds.get("count", cfg.n_seeds);
  cfg.seeds = seeds.get("list", cfg.seeds);
  seeds.finish();

  Section f = root.child("fundamental");
  auto& fc = cfg.fundamental;
  if (f.has("regimes")) fc.regimes = parse_regimes(f.raw("regimes"), f.where() + ".regimes");
  if (f.has("rates_per_second") && f.has("rates_per_day")) {
    throw ConfigError("give either rates_per_second or rates_per_day, not both");
  }
  fc.rates = f.get("rates_per_second", fc.rates);
  if (f.has("rates_per_day")) {
    fc.rates = f.get("rates_per_day", fc.rates);
    for (auto& row : fc.rates) {
      for (auto& v : row) v /= calibration::kSecondsPerDay;
    }
  }
  fc.x0 = f.get("x0", fc.x0);
  fc.m0 = f.get("m0", fc.m0);
  fc.dt = f.get("dt", fc.dt);
  fc.horizon = f.get("horizon_seconds", fc.horizon);
  if (f.has("initial_regime")) {
    const json& v = f.raw("initial_regime");
    if (v.is_string()) {
      if (v.get<std::string>() != "random") throw ConfigError("initial_regime must be an index or \"random\"");
      fc.initial_regime.reset();
    } else if (v.is_number_unsigned()) {
      fc.initial_regime = v.get<std::uint32_t>();
    } else {
      throw ConfigError("initial_regime must be an index or \"random\"");
    }
  }
  f.finish();

  Section pop = root.child("population");
  auto& pc = cfg.population;
  {
    Section v = pop.child("value");
    pc.value_agents = v.get("count", pc.value_agents);
    pc.value.wake_rate = v.get("wake_rate", pc.value.wake_rate);
    pc.value.order_size = v.get("order_size", pc.value.order_size);
    pc.value.noise_sigma = v.get("noise_sigma", pc.value.noise_sigma);
    pc.value.limit_offset_ticks = v.get("limit_offset_ticks", pc.value.limit_offset_ticks);
    v.finish();
  }
  {
    Section m = pop.child("momentum");
    pc.momentum_agents = m.get("count", pc.momentum_agents);
    pc.momentum.wake_rate = m.get("wake_rate", pc.momentum.wake_rate);
    pc.momentum.order_size = m.get("order_size", pc.momentum.order_size);
    pc.momentum.short_window = m.get("short_window", pc.momentum.short_window);
    pc.momentum.long_window = m.get("long_window", pc.momentum.long_window);
    m.finish();
  }
  {
    Section n = pop.child("noise");
    pc.noise_agents = n.get("count", pc.noise_agents);
    pc.noise.wake_rate = n.get("wake_rate", pc.noise.wake_rate);
    pc.noise.min_size = n.get("min_size", pc.noise.min_size);
    pc.noise.max_size = n.get("max_size", pc.noise.max_size);
    pc.noise.spread_width_ticks = n.get("spread_width_ticks", pc.noise.spread_width_ticks);
    pc.noise.market_order_prob = n.get("market_order_prob", pc.noise.market_order_prob);
    n.finish();
  }
  {
    Section mm = pop.child("market_maker");
    pc.market_makers = mm.get("count", pc.market_makers);
    pc.market_maker.wake_period = mm.get("wake_period_seconds", pc.market_maker.wake_period);
    pc.market_maker.levels = mm.get("levels", pc.market_maker.levels);
    pc.market_maker.size = mm.get("size", pc.market_maker.size);
    pc.market_maker.first_level_ticks = mm.get("first_level_ticks", pc.market_maker.first_level_ticks);
    mm.finish();
  }
  pop.finish();

  Section m = root.child("market");
  cfg.latency = m.get("latency_seconds", cfg.latency);
  cfg.warmup = m.get("warmup_seconds", cfg.warmup);
  cfg.l1_interval = m.get("l1_interval_seconds", cfg.l1_interval);
  m.finish();

  Section p = root.child("parent_order");
  if (p.has("side") && p.get<std::string>("side", "buy") != "buy") {
    throw ConfigError("only buy parent orders are supported");
  }
  p.get<std::string>("side", "buy");
  cfg.parent.quantity = p.get("quantity", cfg.parent.quantity);
  cfg.parent.time_limit = p.get("time_limit_seconds", cfg.parent.time_limit);
  cfg.parent.period = p.get("period_seconds", cfg.parent.period);
  cfg.parent.aggregation = p.get("aggregation", cfg.parent.aggregation);
  p.finish();

  if (root.has("strategies")) {
    const auto names = root.get<std::vector<std::string>>("strategies", {});
    cfg.strategies.clear();
    try {
      for (const auto& n : names) cfg.strategies.push_back(execution::parse_strategy(n));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  root.finish();
  cfg.validate();
  return cfg;
}

json to_json(const ScenarioConfig& cfg) {
  const auto& fc = cfg.fundamental;
  const auto& pc = cfg.population;
  json strategies = json::array();
  for (auto s : cfg.strategies) strategies.push_back(std::string(execution::to_string(s)));
  json seeds = {{"base", cfg.base_seed}, {"count", cfg.n_seeds}};
  if (!cfg.seeds.empty()) seeds["list"] = cfg.seeds;
  json initial = fc.initial_regime ? json(*fc.initial_regime) : json("random");
  return {
      {"seeds", seeds},
      {"fundamental",
       {{"regimes", regimes_json(fc.regimes)},
        {"rates_per_second", fc.rates},
        {"x0", fc.x0},
        {"m0", fc.m0},
        {"dt", fc.dt},
        {"horizon_seconds", fc.horizon},
        {"initial_regime", initial}}},
      {"population",
       {{"value",
         {{"count", pc.value_agents},
          {"wake_rate", pc.value.wake_rate},
          {"order_size", pc.value.order_size},
          {"noise_sigma", pc.value.noise_sigma},
          {"limit_offset_ticks", pc.value.limit_offset_ticks}}},
        {"momentum",
         {{"count", pc.momentum_agents},
          {"wake_rate", pc.momentum.wake_rate},
          {"order_size", pc.momentum.order_size},
          {"short_window", pc.momentum.short_window},
          {"long_window", pc.momentum.long_window}}},
        {"noise",
         {{"count", pc.noise_agents},
          {"wake_rate", pc.noise.wake_rate},
          {"min_size", pc.noise.min_size},
          {"max_size", pc.noise.max_size},
          {"spread_width_ticks", pc.noise.spread_width_ticks},
          {"market_order_prob", pc.noise.market_order_prob}}},
        {"market_maker",
         {{"count", pc.market_makers},
          {"wake_period_seconds", pc.market_maker.wake_period},
          {"levels", pc.market_maker.levels},
          {"size", pc.market_maker.size},
          {"first_level_ticks", pc.market_maker.first_level_ticks}}}}},
      {"market",
       {{"latency_seconds", cfg.latency},
        {"warmup_seconds", cfg.warmup},
        {"l1_interval_seconds", cfg.l1_interval}}},
      {"parent_order",
       {{"side", "buy"},
        {"quantity", cfg.parent.quantity},
        {"time_limit_seconds", cfg.parent.time_limit},
        {"period_seconds", cfg.parent.period},
        {"aggregation", cfg.parent.aggregation}}},
      {"strategies", strategies},
  };
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return scenario_from_json(j);
}

CalibrationSettings calibration_from_json(const json& j) {
  CalibrationSettings cfg;
  Section root(j, "config");
  cfg.trials = root.get("trials", cfg.trials);
  cfg.seed = root.get("seed", cfg.seed);

  Section o = root.child("ohlc");
  cfg.ohlc.day_offset_seconds = o.get("day_offset_seconds", cfg.ohlc.day_offset_seconds);
  cfg.ohlc.bar_seconds = o.get("bar_seconds", cfg.ohlc.bar_seconds);
  cfg.ohlc.max_missing_fraction = o.get("max_missing_fraction", cfg.ohlc.max_missing_fraction);
  cfg.ohlc.price_scale = o.get("price_scale", cfg.ohlc.price_scale);
  o.finish();

  auto& day = cfg.search.day;
  Section l = root.child("label");
  day.label.short_window = l.get("short_window", day.label.short_window);
  day.label.long_window = l.get("long_window", day.label.long_window);
  day.label.alpha = l.get("alpha", day.label.alpha);
  day.label.count_initial_entry = l.get("count_initial_entry", day.label.count_initial_entry);
  l.finish();

  Section s = root.child("search");
  if (s.has("method")) {
    try {
      cfg.search.method = calibration::parse_count_method(s.get<std::string>("method", "labeled"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  cfg.search.n_days = s.get("n_days", cfg.search.n_days);
  cfg.search.rate_min = s.get("rate_min", cfg.search.rate_min);
  cfg.search.rate_max = s.get("rate_max", cfg.search.rate_max);
  cfg.search.threads = s.get("threads", cfg.search.threads);
  s.finish();

  Section d = root.child("day");
  if (d.has("regimes")) day.regimes = parse_regimes(d.raw("regimes"), d.where() + ".regimes");
  day.x0 = d.get("x0", day.x0);
  day.m0 = d.get("m0", day.m0);
  day.day_seconds = d.get("day_seconds", day.day_seconds);
  day.dt = d.get("dt", day.dt);
  day.bar_seconds = d.get("bar_seconds", day.bar_seconds);
  day.random_initial_regime = d.get("random_initial_regime", day.random_initial_regime);
  d.finish();
  root.finish();

  try {
    day.label.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
  return cfg;
}

json to_json(const CalibrationSettings& cfg) {
  const auto& day = cfg.search.day;
  return {
      {"trials", cfg.trials},
      {"seed", cfg.seed},
      {"ohlc",
       {{"day_offset_seconds", cfg.ohlc.day_offset_seconds},
        {"bar_seconds", cfg.ohlc.bar_seconds},
        {"max_missing_fraction", cfg.ohlc.max_missing_fraction},
        {"price_scale", cfg.ohlc.price_scale}}},
      {"label",
       {{"short_window", day.label.short_window},
        {"long_window", day.label.long_window},
        {"alpha", day.label.alpha},
        {"count_initial_entry", day.label.count_initial_entry}}},
      {"search",
       {{"method", std::string(calibration::to_string(cfg.search.method))},
        {"n_days", cfg.search.n_days},
        {"rate_min", cfg.search.rate_min},
        {"rate_max", cfg.search.rate_max}}},
      {"day",
       {{"regimes", regimes_json(day.regimes)},
        {"x0", day.x0},
        {"m0", day.m0},
        {"day_seconds", day.day_seconds},
        {"dt", day.dt},
        {"bar_seconds", day.bar_seconds},
        {"random_initial_regime", day.random_initial_regime}}},
  };
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const json& j) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a64(j.dump()));
  return buf;
}

// ---------------------------------------------------------------------------

std::uint32_t initial_regime_for(const ScenarioConfig& cfg, std::uint64_t seed) {
  if (cfg.fundamental.initial_regime) return *cfg.fundamental.initial_regime;
  Rng rng = make_rng(seed, Stream::InitialRegime);
  return static_cast<std::uint32_t>(
      std::uniform_int_distribution<std::size_t>(0, cfg.fundamental.regimes.size() - 1)(rng));
}

std::shared_ptr<const sde::FundamentalPath> build_fundamental(const ScenarioConfig& cfg,
                                                              std::uint64_t seed) {
  const auto params = cfg.ctmstou(initial_regime_for(cfg, seed));
  return std::make_shared<const sde::FundamentalPath>(
      sde::generate_ctmstou_path(params, cfg.simulation_horizon(), cfg.fundamental.dt, seed));
}

std::size_t switches_between(const sde::RegimeTrace& trace, double start, double end) {
  std::size_t n = 0;
  for (std::size_t i = 1; i < trace.events.size(); ++i) {
    const auto& e = trace.events[i];
    if (e.time > start && e.time <= end && e.state != trace.events[i - 1].state) ++n;
  }
  return n;
}

EpisodeResult run_episode(const ScenarioConfig& cfg, std::uint64_t seed,
                          execution::Strategy strategy, const EpisodeOptions& options) {
  EpisodeResult r;
  r.seed = seed;
  r.strategy = strategy;
  try {
    auto path = options.fundamental ? options.fundamental : build_fundamental(cfg, seed);
    auto oracle = std::make_shared<const Oracle>(path, cfg.fundamental.regimes);

    Kernel kernel(KernelConfig{seed, seconds_to_nanos(cfg.latency)});
    if (options.event_recorder) kernel.set_event_recorder(options.event_recorder);

    auto exchange =
        std::make_shared<ExchangeAgent>(ExchangeConfig{seconds_to_nanos(cfg.l1_interval)});
    const AgentId ex = kernel.register_agent(exchange);
    const AgentId oa = kernel.register_agent(std::make_shared<OracleAgent>(oracle));

    const auto& pop = cfg.population;
    const auto p0 = static_cast<Price>(std::llround(cfg.fundamental.x0));
    for (std::size_t i = 0; i < pop.market_makers; ++i) {
      kernel.register_agent(std::make_shared<MarketMakerAgent>(ex, pop.market_maker, p0));
    }
    for (std::size_t i = 0; i < pop.value_agents; ++i) {
      kernel.register_agent(std::make_shared<ValueAgent>(ex, oracle, pop.value));
    }
    for (std::size_t i = 0; i < pop.momentum_agents; ++i) {
      kernel.register_agent(std::make_shared<MomentumAgent>(ex, pop.momentum));
    }
    for (std::size_t i = 0; i < pop.noise_agents; ++i) {
      kernel.register_agent(std::make_shared<NoiseAgent>(ex, pop.noise, p0));
    }

    const SimTime start = seconds_to_nanos(cfg.warmup);
    auto exec = std::make_shared<execution::ExecutionAgent>(
        ex, oa, execution::ExecutionAgentConfig{cfg.parent, strategy, start});
    kernel.register_agent(exec);

    const auto summary = kernel.run(exec->end_time());
    r.events_processed = summary.events_processed;
    r.metrics = exec->metrics();
    r.arrival_mid = exec->arrival_mid();
    r.fills = exec->executions();
    r.placements = exec->placements();
    r.l1 = exchange->l1_stream();
    r.unfilled_market_orders = exec->unfilled_market_orders();
    r.skipped_children = exec->skipped_children();
    r.regime_switch_count =
        switches_between(path->trace, cfg.warmup, cfg.warmup + cfg.parent.time_limit);
  } catch (const std::exception& e) {
    r.failed = true;
    r.error = e.what();
  }
  return r;
}

std::vector<EpisodeResult> run_experiment(const ScenarioConfig& cfg, unsigned threads) {
  cfg.validate();
  const auto seeds = cfg.seed_list();
  const std::size_t n = cfg.strategies.size() * seeds.size();
  std::vector<EpisodeResult> results(n);
  const auto task = [&](std::size_t i) {
    const auto strategy = cfg.strategies[i / seeds.size()];
    results[i] = run_episode(cfg, seeds[i % seeds.size()], strategy);
  };
  unsigned workers = threads != 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) task(i);
    });
  }
  for (auto& t : pool) t.join();
  return results;
}

// ---------------------------------------------------------------------------

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace {

std::string opt_number(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

ResultRow to_row(const EpisodeResult& r) {
  ResultRow row;
  row.seed = r.seed;
  row.strategy = std::string(execution::to_string(r.strategy));
  row.failed = r.failed;
  if (!r.failed) {
    row.pct_comp = r.metrics.pct_comp;
    row.wapr = r.metrics.wapr;
    row.normalized_price = r.metrics.normalized_price;
    row.n_fills = r.metrics.n_fills;
    row.regime_switch_count = r.regime_switch_count;
  }
  return row;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "seed,strategy,pct_comp,wapr,normalized_price,n_fills,regime_switch_count,status\n";
  for (const auto& r : rows) {
    out << r.seed << ',' << r.strategy << ',';
    if (r.failed) {
      out << "NA,NA,NA,NA,NA,failed\n";
      continue;
    }
    out << format_number(r.pct_comp) << ',' << opt_number(r.wapr) << ','
        << opt_number(r.normalized_price) << ',' << r.n_fills << ',' << r.regime_switch_count
        << ",ok\n";
  }
}

std::vector<ResultRow> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("results file is empty");
  const auto header = split_line(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* need : {"seed", "strategy", "pct_comp", "wapr", "normalized_price"}) {
    if (!col.contains(need)) throw std::runtime_error(std::string("results file lacks column ") + need);
  }
  std::vector<ResultRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_line(line);
    const auto field = [&](const std::string& name) -> std::string {
      const auto it = col.find(name);
      if (it == col.end()) return "NA";
      if (it->second >= f.size()) {
        throw std::runtime_error("line " + std::to_string(line_no) + ": missing " + name);
      }
      return f[it->second];
    };
    const auto number = [&](const std::string& name) -> std::optional<double> {
      const auto s = field(name);
      if (s == "NA" || s.empty()) return std::nullopt;
      try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
      } catch (const std::exception&) {
        throw std::runtime_error("line " + std::to_string(line_no) + ": bad " + name + " '" + s + "'");
      }
    };
    ResultRow r;
    r.seed = static_cast<std::uint64_t>(number("seed").value_or(0));
    r.strategy = field("strategy");
    r.failed = field("status") == "failed";
    if (!r.failed) {
      r.pct_comp = number("pct_comp").value_or(0.0);
      r.wapr = number("wapr");
      r.normalized_price = number("normalized_price");
      r.n_fills = static_cast<std::size_t>(number("n_fills").value_or(0));
      r.regime_switch_count = static_cast<std::size_t>(number("regime_switch_count").value_or(0));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<StrategySummary> summarize(const std::vector<ResultRow>& rows) {
  struct Acc {
    StrategySummary s;
    double pct = 0.0;
    double wapr = 0.0;
    std::size_t n_wapr = 0;
    double norm = 0.0;
    std::size_t n_norm = 0;
  };
  std::map<std::string, Acc> acc;
  for (const auto& r : rows) {
    auto& a = acc[r.strategy];
    a.s.strategy = r.strategy;
    ++a.s.episodes;
    if (r.failed) {
      ++a.s.failed;
      continue;
    }
    a.pct += r.pct_comp;
    if (r.wapr) {
      a.wapr += *r.wapr;
      ++a.n_wapr;
    }
    if (r.normalized_price) {
      a.norm += *r.normalized_price;
      ++a.n_norm;
    }
  }
  std::vector<StrategySummary> out;
  for (auto& [name, a] : acc) {
    const std::size_t ok = a.s.episodes - a.s.failed;
    if (ok > 0) a.s.mean_pct_comp = a.pct / static_cast<double>(ok);
    if (a.n_wapr > 0) a.s.mean_wapr = a.wapr / static_cast<double>(a.n_wapr);
    if (a.n_norm > 0) a.s.mean_normalized_price = a.norm / static_cast<double>(a.n_norm);
    out.push_back(a.s);
  }
  std::stable_sort(out.begin(), out.end(), [](const StrategySummary& x, const StrategySummary& y) {
    if (x.mean_normalized_price.has_value() != y.mean_normalized_price.has_value()) {
      return x.mean_normalized_price.has_value();
    }
    if (x.mean_normalized_price && *x.mean_normalized_price != *y.mean_normalized_price) {
      return *x.mean_normalized_price < *y.mean_normalized_price;
    }
    return x.strategy < y.strategy;
  });
  return out;
}

void write_summary_table(std::ostream& out, const std::vector<StrategySummary>& summary) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-16s %8s %6s %10s %14s %16s\n", "strategy", "episodes", "failed",
                "pct_comp", "mean_wapr", "mean_norm_price");
  out << buf;
  for (const auto& s : summary) {
    const std::string wapr = s.mean_wapr ? format_number(*s.mean_wapr) : "NA";
    char norm[32] = "NA";
    if (s.mean_normalized_price) std::snprintf(norm, sizeof norm, "%.6f", *s.mean_normalized_price);
    std::snprintf(buf, sizeof buf, "%-16s %8zu %6zu %9.2f%% %14s %16s\n", s.strategy.c_str(),
                  s.episodes, s.failed, 100.0 * s.mean_pct_comp, wapr.c_str(), norm);
    out << buf;
  }
}

}  // namespace regimesim::experiment
