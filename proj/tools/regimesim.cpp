// Command-line front end: fundamental paths, OHLC labelling, rate calibration,
// single market runs, multi-seed experiments and result reports.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "regimesim/calibration.hpp"
#include "regimesim/execution.hpp"
#include "regimesim/experiment.hpp"
#include "regimesim/sde.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace regimesim;
namespace ex = regimesim::experiment;
namespace cal = regimesim::calibration;

namespace {

struct Outputs {
  fs::path dir;
  std::vector<std::string> files;

  std::ofstream open(const std::string& name) {
    const fs::path p = dir / name;
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    files.push_back(name);
    return out;
  }

  void manifest(const std::string& command, const json& config, const std::vector<std::uint64_t>& seeds,
                json extra = json::object()) {
    json m = {{"tool", "regimesim"},
              {"version", REGIMESIM_VERSION},
              {"command", command},
              {"config_hash", ex::config_hash(config)},
              {"seeds", seeds},
              {"config", config},
              {"outputs", files}};
    for (auto& [k, v] : extra.items()) m[k] = v;
    auto out = open("manifest.json");
    out << m.dump(2) << '\n';
  }
};

std::string opt_price(const std::optional<Price>& p) { return p ? std::to_string(*p) : ""; }

ex::ScenarioConfig scenario_or_default(const std::string& path) {
  if (path.empty()) {
    ex::ScenarioConfig cfg;
    cfg.validate();
    return cfg;
  }
  return ex::load_scenario(path);
}

ex::CalibrationSettings calibration_settings(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) throw ex::ConfigError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ex::ConfigError(path + ": " + e.what());
  }
  return ex::calibration_from_json(j);
}

void write_fills(std::ostream& out, const std::vector<execution::Execution>& fills) {
  out << "time_ns,price,qty\n";
  for (const auto& f : fills) out << f.time << ',' << f.price << ',' << f.qty << '\n';
}

void write_l1(std::ostream& out, const std::vector<L1Row>& rows) {
  out << "time_ns,best_bid,best_ask,last_price,last_qty\n";
  for (const auto& r : rows) {
    out << r.time << ',' << opt_price(r.best_bid) << ',' << opt_price(r.best_ask) << ','
        << opt_price(r.last_price) << ',' << r.last_qty << '\n';
  }
}

void write_histogram(std::ostream& out, const cal::SwitchCountDistribution& d) {
  std::map<std::size_t, std::size_t> hist;
  for (auto c : d.counts) ++hist[c];
  out << "switch_count,days\n";
  for (const auto& [count, days] : hist) out << count << ',' << days << '\n';
}

std::string episode_name(const ex::EpisodeResult& r) {
  return std::string(execution::to_string(r.strategy)) + "_seed" + std::to_string(r.seed) + ".csv";
}

// ---------------------------------------------------------------------------

int cmd_simulate_fundamental(const std::string& config_path, std::vector<std::uint64_t> seeds,
                             const std::string& out_dir) {
  auto cfg = scenario_or_default(config_path);
  if (!seeds.empty()) cfg.seeds = seeds;
  Outputs out{out_dir, {}};
  const auto list = cfg.seed_list();
  for (auto seed : list) {
    const auto path = ex::build_fundamental(cfg, seed);
    auto f = out.open("fundamental_seed" + std::to_string(seed) + ".csv");
    f << "t,X,M,s\n";
    for (std::size_t i = 0; i < path->size(); ++i) {
      f << ex::format_number(path->time_at(i)) << ',' << ex::format_number(path->values[i]) << ','
        << ex::format_number(path->centers[i]) << ',' << path->states[i].index << '\n';
    }
    std::cout << "seed " << seed << ": " << path->size() << " points, "
              << path->trace.switch_count() << " regime switches\n";
  }
  out.manifest("simulate-fundamental", ex::to_json(cfg), list);
  return 0;
}

int cmd_label(const std::string& input, const std::string& config_path, const std::string& out_dir) {
  const auto settings = calibration_settings(config_path);
  const auto data = cal::load_ohlc_csv(input, settings.ohlc);
  Outputs out{out_dir, {}};
  {
    auto f = out.open("labels.csv");
    f << "date,day_start,bars,switch_count\n";
    for (const auto& day : data.days) {
      const auto opens = day.opens();
      f << day.date() << ',' << day.day_start << ',' << day.bars.size() << ','
        << cal::label_switch_count(opens, settings.search.day.label) << '\n';
    }
  }
  if (!data.excluded.empty()) {
    auto f = out.open("excluded_days.csv");
    f << "day_start,bars,reason\n";
    for (const auto& d : data.excluded) f << d.day_start << ',' << d.bars << ',' << d.reason << '\n';
  }
  std::cout << data.days.size() << " days labelled, " << data.excluded.size() << " excluded\n";
  json extra = {{"input", fs::path(input).filename().string()}};
  out.manifest("label", ex::to_json(settings), {}, extra);
  return 0;
}

int cmd_calibrate(const std::string& input, const std::string& config_path,
                  std::optional<std::size_t> trials, std::optional<std::uint64_t> seed,
                  const std::string& method, unsigned threads, const std::string& out_dir) {
  auto settings = calibration_settings(config_path);
  // Thread count changes speed only, never results, so it stays out of the manifest.
  if (threads != 0) settings.search.threads = threads;
  if (trials) settings.trials = *trials;
  if (seed) settings.seed = *seed;
  if (!method.empty()) settings.search.method = cal::parse_count_method(method);
  if (settings.trials < 1) throw std::invalid_argument("trials must be >= 1");

  const auto data = cal::load_ohlc_csv(input, settings.ohlc);
  if (data.days.empty()) throw std::runtime_error("no usable days in " + input);
  cal::SwitchCountDistribution real;
  for (const auto& day : data.days) {
    const auto opens = day.opens();
    real.counts.push_back(cal::label_switch_count(opens, settings.search.day.label));
  }
  const auto result = cal::calibrate_rates(real, settings.trials, settings.seed, settings.search);

  Outputs out{out_dir, {}};
  const json report = {
      {"lambda_per_second", result.stay},
      {"omega_per_second", result.switch_rate},
      {"lambda_per_day", result.stay * cal::kSecondsPerDay},
      {"omega_per_day", result.switch_rate * cal::kSecondsPerDay},
      {"distance", result.distance},
      {"trials", result.trials},
      {"best_trial", result.best_trial},
      {"seed", settings.seed},
      {"method", std::string(cal::to_string(settings.search.method))},
      {"days", real.counts.size()},
      {"excluded_days", data.excluded.size()},
      {"real_mean_switches", real.mean()},
      {"simulated_mean_switches", result.best_simulated.mean()},
  };
  {
    auto f = out.open("calibration_report.json");
    f << report.dump(2) << '\n';
  }
  {
    auto f = out.open("histogram_real.csv");
    write_histogram(f, real);
  }
  {
    auto f = out.open("histogram_simulated.csv");
    write_histogram(f, result.best_simulated);
  }
  {
    auto f = out.open("trials.csv");
    f << "trial,lambda_per_second,omega_per_second,distance\n";
    for (std::size_t i = 0; i < result.history.size(); ++i) {
      const auto& t = result.history[i];
      f << i << ',' << ex::format_number(t.stay) << ',' << ex::format_number(t.switch_rate) << ','
        << ex::format_number(t.distance) << '\n';
    }
  }
  std::printf("lambda = %.6g /s (%.4f /day)\nomega  = %.6g /s (%.4f /day)\ndistance = %.6g over %zu trials\n",
              result.stay, result.stay * cal::kSecondsPerDay, result.switch_rate,
              result.switch_rate * cal::kSecondsPerDay, result.distance, result.trials);
  json extra = {{"input", fs::path(input).filename().string()}};
  out.manifest("calibrate", ex::to_json(settings), {settings.seed}, extra);
  return 0;
}

int cmd_run_market(const std::string& config_path, std::optional<std::uint64_t> seed,
                   const std::string& strategy_name, bool events, const std::string& out_dir) {
  auto cfg = scenario_or_default(config_path);
  const std::uint64_t s = seed.value_or(cfg.seed_list().front());
  const auto strategy = execution::parse_strategy(strategy_name);
  Outputs out{out_dir, {}};
  ex::EpisodeOptions options;
  std::optional<std::ofstream> event_log;
  if (events) {
    event_log.emplace(out.open("events.jsonl"));
    options.event_recorder = jsonl_event_writer(*event_log);
  }
  const auto r = ex::run_episode(cfg, s, strategy, options);
  if (r.failed) throw std::runtime_error("episode failed: " + r.error);
  {
    auto f = out.open("results.csv");
    ex::write_results_csv(f, {ex::to_row(r)});
  }
  {
    auto f = out.open("fills.csv");
    write_fills(f, r.fills);
  }
  {
    auto f = out.open("l1.csv");
    write_l1(f, r.l1);
  }
  std::printf("%s seed %llu: pct_comp %.4f, normalized price %s, %zu fills, %zu regime switches\n",
              std::string(execution::to_string(strategy)).c_str(), static_cast<unsigned long long>(s),
              r.metrics.pct_comp,
              r.metrics.normalized_price ? ex::format_number(*r.metrics.normalized_price).c_str() : "NA",
              r.metrics.n_fills, r.regime_switch_count);
  out.manifest("run-market", ex::to_json(cfg), {s},
               {{"strategy", std::string(execution::to_string(strategy))}});
  return 0;
}

int cmd_experiment(const std::string& config_path, std::vector<std::uint64_t> seeds,
                   unsigned threads, const std::string& out_dir) {
  auto cfg = scenario_or_default(config_path);
  if (!seeds.empty()) cfg.seeds = seeds;
  const auto results = ex::run_experiment(cfg, threads);
  Outputs out{out_dir, {}};
  std::vector<ex::ResultRow> rows;
  std::size_t failed = 0;
  for (const auto& r : results) {
    rows.push_back(ex::to_row(r));
    if (r.failed) {
      ++failed;
      std::cerr << "episode " << execution::to_string(r.strategy) << " seed " << r.seed
                << " failed: " << r.error << '\n';
      continue;
    }
    auto f = out.open("fills/" + episode_name(r));
    write_fills(f, r.fills);
    auto l = out.open("l1/" + episode_name(r));
    write_l1(l, r.l1);
  }
  {
    auto f = out.open("results.csv");
    ex::write_results_csv(f, rows);
  }
  {
    auto f = out.open("density_price.csv");
    f << "strategy,seed,normalized_price\n";
    for (const auto& r : rows) {
      if (!r.failed && r.normalized_price) {
        f << r.strategy << ',' << r.seed << ',' << ex::format_number(*r.normalized_price) << '\n';
      }
    }
  }
  {
    auto f = out.open("density_pct.csv");
    f << "strategy,seed,pct_comp\n";
    for (const auto& r : rows) {
      if (!r.failed) f << r.strategy << ',' << r.seed << ',' << ex::format_number(r.pct_comp) << '\n';
    }
  }
  {
    auto f = out.open("scatter.csv");
    f << "strategy,seed,pct_comp,wapr\n";
    for (const auto& r : rows) {
      if (!r.failed && r.wapr) {
        f << r.strategy << ',' << r.seed << ',' << ex::format_number(r.pct_comp) << ','
          << ex::format_number(*r.wapr) << '\n';
      }
    }
  }
  const auto summary = ex::summarize(rows);
  {
    auto f = out.open("summary.txt");
    ex::write_summary_table(f, summary);
  }
  ex::write_summary_table(std::cout, summary);
  out.manifest("experiment", ex::to_json(cfg), cfg.seed_list(), {{"failed_episodes", failed}});
  return 0;
}

int cmd_report(const std::string& input) {
  std::ifstream in(input);
  if (!in) throw std::runtime_error("cannot open " + input);
  ex::write_summary_table(std::cout, ex::summarize(ex::read_results_csv(in)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regime-switching market simulator and execution experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(REGIMESIM_VERSION));

  std::string config;
  std::string out_dir = "out";
  std::string input;
  std::vector<std::uint64_t> seeds;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  std::string method;
  std::string strategy = "full_MO";
  unsigned threads = 0;
  bool events = false;

  auto* sim = app.add_subcommand("simulate-fundamental", "Write fundamental paths (t, X, M, s) per seed");
  sim->add_option("--config", config, "Scenario JSON")->check(CLI::ExistingFile);
  sim->add_option("--seed", seeds, "Seed (repeatable); defaults to the config seeds");
  sim->add_option("--out", out_dir, "Output directory");

  auto* label = app.add_subcommand("label", "Per-day regime switch counts of an OHLC file");
  label->add_option("--input", input, "OHLC CSV")->required()->check(CLI::ExistingFile);
  label->add_option("--config", config, "Calibration JSON")->check(CLI::ExistingFile);
  label->add_option("--out", out_dir, "Output directory");

  auto* calib = app.add_subcommand("calibrate", "Random search for the regime switching rates");
  calib->add_option("--input", input, "OHLC CSV")->required()->check(CLI::ExistingFile);
  calib->add_option("--config", config, "Calibration JSON")->check(CLI::ExistingFile);
  auto* trials_opt = calib->add_option("--trials", trials, "Number of random-search trials");
  auto* cseed_opt = calib->add_option("--seed", seed, "Search seed");
  calib->add_option("--method", method, "Switch counting on simulated days")
      ->check(CLI::IsMember({"labeled", "exact"}));
  calib->add_option("--threads", threads, "Worker threads (0: all cores)");
  calib->add_option("--out", out_dir, "Output directory");

  auto* run = app.add_subcommand("run-market", "Run one market episode");
  run->add_option("--config", config, "Scenario JSON")->check(CLI::ExistingFile);
  auto* rseed_opt = run->add_option("--seed", seed, "Episode seed");
  run->add_option("--strategy", strategy, "full_MO, full_LO, regime_aware_0 or regime_aware_1");
  run->add_flag("--events", events, "Also write the processed-event log as JSONL");
  run->add_option("--out", out_dir, "Output directory");

  auto* expt = app.add_subcommand("experiment", "Every strategy on every seed");
  expt->add_option("--config", config, "Scenario JSON")->check(CLI::ExistingFile);
  expt->add_option("--seed", seeds, "Seed (repeatable); defaults to the config seeds");
  expt->add_option("--threads", threads, "Worker threads (0: all cores)");
  expt->add_option("--out", out_dir, "Output directory");

  auto* report = app.add_subcommand("report", "Summary table of a results CSV");
  report->add_option("--input,input", input, "results.csv")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate_fundamental(config, seeds, out_dir);
    if (label->parsed()) return cmd_label(input, config, out_dir);
    if (calib->parsed()) {
      std::optional<std::size_t> t;
      if (*trials_opt) t = trials;
      std::optional<std::uint64_t> s;
      if (*cseed_opt) s = seed;
      return cmd_calibrate(input, config, t, s, method, threads, out_dir);
    }
    if (run->parsed()) {
      std::optional<std::uint64_t> s;
      if (*rseed_opt) s = seed;
      return cmd_run_market(config, s, strategy, events, out_dir);
    }
    if (expt->parsed()) return cmd_experiment(config, seeds, threads, out_dir);
    if (report->parsed()) return cmd_report(input);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
