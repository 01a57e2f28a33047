#include "regimesim/sde.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace regimesim::sde {

RateMatrix::RateMatrix(const std::vector<std::vector<double>>& rows) : n_(rows.size()) {
  if (n_ == 0) throw std::invalid_argument("rate matrix must have at least one state");
  entries_.reserve(n_ * n_);
  for (const auto& row : rows) {
    if (row.size() != n_) {
      throw std::invalid_argument("rate matrix must be square");
    }
    for (double v : row) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument("rate matrix entries must be finite and non-negative");
      }
      entries_.push_back(v);
    }
  }
}

RateMatrix RateMatrix::symmetric_two_state(double stay_rate, double switch_rate) {
  return RateMatrix({{stay_rate, switch_rate}, {switch_rate, stay_rate}});
}

double RateMatrix::total_rate(std::size_t from) const {
  double sum = 0.0;
  for (std::size_t j = 0; j < n_; ++j) sum += (*this)(from, j);
  return sum;
}

double RateMatrix::switch_rate(std::size_t from) const {
  double sum = 0.0;
  for (std::size_t j = 0; j < n_; ++j) {
    if (j != from) sum += (*this)(from, j);
  }
  return sum;
}

std::vector<std::vector<double>> RateMatrix::rows() const {
  std::vector<std::vector<double>> out(n_, std::vector<double>(n_));
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) out[i][j] = (*this)(i, j);
  return out;
}

void CtmstouParams::validate() const {
  if (regimes.empty()) throw std::invalid_argument("at least one regime is required");
  if (rates.size() != regimes.size()) {
    throw std::invalid_argument("rate matrix dimension " + std::to_string(rates.size()) +
                                " does not match regime count " +
                                std::to_string(regimes.size()));
  }
  if (s0.index >= regimes.size()) throw std::invalid_argument("initial regime out of range");
  for (const auto& r : regimes) {
    if (!(r.theta >= 0.0) || !(r.sigma >= 0.0) || !std::isfinite(r.mu)) {
      throw std::invalid_argument("regime parameters require theta >= 0, sigma >= 0, finite mu");
    }
  }
}

RegimeState RegimeTrace::state_at(double t) const {
  if (events.empty()) throw std::logic_error("empty regime trace");
  // Last event with time <= t.
  std::size_t lo = 0;
  std::size_t hi = events.size();
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (events[mid].time <= t) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return events[lo].state;
}

std::size_t RegimeTrace::switch_count() const {
  std::size_t n = 0;
  for (std::size_t i = 1; i < events.size(); ++i) {
    if (events[i].state != events[i - 1].state) ++n;
  }
  return n;
}

std::size_t step_count(double horizon, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  return static_cast<std::size_t>(std::floor(horizon / dt + 1e-9));
}

std::vector<double> time_grid(double horizon, double dt) {
  const std::size_t n = step_count(horizon, dt);
  std::vector<double> grid(n + 1);
  for (std::size_t i = 0; i <= n; ++i) grid[i] = static_cast<double>(i) * dt;
  return grid;
}

RegimeTrace ctmc_sample_trace(const RateMatrix& rates, RegimeState s0, double horizon, Rng& rng) {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (s0.index >= rates.size()) {
    throw std::invalid_argument("initial regime " + std::to_string(s0.index) +
                                " is outside a rate matrix of dimension " +
                                std::to_string(rates.size()));
  }
  RegimeTrace trace;
  trace.events.push_back({0.0, s0});
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double t = 0.0;
  RegimeState state = s0;
  for (;;) {
    const double total = rates.total_rate(state.index);
    if (total <= 0.0) break;  // absorbing
    t += std::exponential_distribution<double>(total)(rng);
    if (t >= horizon) break;
    const double pick = unit(rng) * total;
    double acc = 0.0;
    std::size_t next = rates.size() - 1;
    for (std::size_t j = 0; j < rates.size(); ++j) {
      acc += rates(state.index, j);
      if (pick < acc) {
        next = j;
        break;
      }
    }
    // Guard against landing on a zero-rate tail entry through rounding.
    while (rates(state.index, next) <= 0.0 && next > 0) --next;
    state = RegimeState{static_cast<std::uint32_t>(next)};
    trace.events.push_back({t, state});
  }
  return trace;
}

namespace {

// Walks the trace forward in time; successive queries must be non-decreasing.
class CenterCursor {
 public:
  CenterCursor(const RegimeTrace& trace, std::span<const RegimeParams> regimes, double m0)
      : trace_(trace), regimes_(regimes), anchor_value_(m0) {
    if (trace.events.empty()) throw std::invalid_argument("empty regime trace");
  }

  double at(double t) {
    while (next_ < trace_.events.size() && trace_.events[next_].time <= t) {
      const auto& prev = trace_.events[next_ - 1];
      anchor_value_ += slope(prev.state) * (trace_.events[next_].time - prev.time);
      ++next_;
    }
    const auto& cur = trace_.events[next_ - 1];
    return anchor_value_ + slope(cur.state) * (t - cur.time);
  }

 private:
  double slope(RegimeState s) const {
    if (s.index >= regimes_.size()) throw std::invalid_argument("trace state has no regime params");
    return regimes_[s.index].mu;
  }

  const RegimeTrace& trace_;
  std::span<const RegimeParams> regimes_;
  double anchor_value_;
  std::size_t next_ = 1;
};

}  // namespace

double center_at(const RegimeTrace& trace, std::span<const RegimeParams> regimes, double m0,
                 double t) {
  CenterCursor cursor(trace, regimes, m0);
  return cursor.at(t);
}

std::vector<double> center_series(const RegimeTrace& trace, std::span<const RegimeParams> regimes,
                                  double m0, std::span<const double> grid) {
  CenterCursor cursor(trace, regimes, m0);
  std::vector<double> out;
  out.reserve(grid.size());
  double last = -INFINITY;
  for (double t : grid) {
    if (t < last) throw std::invalid_argument("center grid must be non-decreasing");
    last = t;
    out.push_back(cursor.at(t));
  }
  return out;
}

std::vector<double> wiener_increments(std::size_t n, double dt, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = std::sqrt(dt);
  std::vector<double> dW(n);
  for (auto& w : dW) w = normal(rng) * scale;
  return dW;
}

std::vector<double> euler_maruyama(double x0, const std::function<double(double, double)>& drift,
                                   const std::function<double(double, double)>& diffusion,
                                   double horizon, double dt, std::uint64_t seed) {
  const std::size_t n = step_count(horizon, dt);
  Rng rng = make_rng(seed, Stream::Diffusion);
  const auto dW = wiener_increments(n, dt, rng);
  std::vector<double> x(n + 1);
  x[0] = x0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    x[i + 1] = euler_maruyama_step(x[i], drift(x[i], t), diffusion(x[i], t), dt, dW[i]);
  }
  return x;
}

FundamentalPath generate_ctmstou_path(const CtmstouParams& params, double horizon, double dt,
                                      std::uint64_t seed) {
  params.validate();
  Rng regime_rng = make_rng(seed, Stream::Regime);
  const RegimeTrace trace = ctmc_sample_trace(params.rates, params.s0, horizon, regime_rng);
  return generate_ctmstou_path(params, trace, horizon, dt, seed);
}

FundamentalPath generate_ctmstou_path(const CtmstouParams& params, const RegimeTrace& trace,
                                      double horizon, double dt, std::uint64_t seed) {
  params.validate();
  const auto grid = time_grid(horizon, dt);
  const std::size_t n = grid.size() - 1;

  FundamentalPath path;
  path.dt = dt;
  path.trace = trace;
  path.centers = center_series(trace, params.regimes, params.m0, grid);
  path.states.reserve(grid.size());
  for (double t : grid) path.states.push_back(trace.state_at(t));

  Rng rng = make_rng(seed, Stream::Diffusion);
  const auto dW = wiener_increments(n, dt, rng);
  path.values.resize(n + 1);
  path.values[0] = params.x0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = params.regimes[path.states[i].index];
    const double x = path.values[i];
    path.values[i + 1] = euler_maruyama_step(x, r.theta * (path.centers[i] - x), r.sigma, dt, dW[i]);
  }
  return path;
}

std::vector<double> generate_ou_path(double theta, double mu, double sigma, double x0,
                                     double horizon, double dt, std::uint64_t seed) {
  if (!(theta >= 0.0) || !(sigma >= 0.0)) {
    throw std::invalid_argument("OU requires theta >= 0 and sigma >= 0");
  }
  const std::size_t n = step_count(horizon, dt);
  Rng rng = make_rng(seed, Stream::Diffusion);
  const auto dW = wiener_increments(n, dt, rng);
  std::vector<double> x(n + 1);
  x[0] = x0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i + 1] = euler_maruyama_step(x[i], theta * (mu - x[i]), sigma, dt, dW[i]);
  }
  return x;
}

std::vector<double> generate_tou_path(double theta, double mu, double trend, double sigma,
                                      double x0, double horizon, double dt, std::uint64_t seed) {
  // Detrended Y_t = X_t - trend*t is a plain OU process.
  auto y = generate_ou_path(theta, mu, sigma, x0, horizon, dt, seed);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += trend * (static_cast<double>(i) * dt);
  return y;
}

std::vector<double> generate_fou_path(double theta, const std::function<double(double)>& center,
                                      double sigma, double x0, double horizon, double dt,
                                      std::uint64_t seed) {
  if (!(theta >= 0.0) || !(sigma >= 0.0)) {
    throw std::invalid_argument("FOU requires theta >= 0 and sigma >= 0");
  }
  const std::size_t n = step_count(horizon, dt);
  Rng rng = make_rng(seed, Stream::Diffusion);
  const auto dW = wiener_increments(n, dt, rng);
  std::vector<double> x(n + 1);
  x[0] = x0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    x[i + 1] = euler_maruyama_step(x[i], theta * (center(t) - x[i]), sigma, dt, dW[i]);
  }
  return x;
}

std::vector<double> gbm_exact_path(double s0, double mu, double sigma, double horizon, double dt,
                                   std::uint64_t seed) {
  if (!(s0 > 0.0)) throw std::invalid_argument("GBM requires s0 > 0");
  const std::size_t n = step_count(horizon, dt);
  Rng rng = make_rng(seed, Stream::Diffusion);
  const auto dW = wiener_increments(n, dt, rng);
  std::vector<double> s(n + 1);
  s[0] = s0;
  double w = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w += dW[i];
    const double t = static_cast<double>(i + 1) * dt;
    s[i + 1] = s0 * std::exp(sigma * w + (mu - 0.5 * sigma * sigma) * t);
  }
  return s;
}

std::vector<double> gbm_euler_path(double s0, double mu, double sigma, double horizon, double dt,
                                   std::uint64_t seed) {
  if (!(s0 > 0.0)) throw std::invalid_argument("GBM requires s0 > 0");
  return euler_maruyama(
      s0, [mu](double x, double) { return mu * x; }, [sigma](double x, double) { return sigma * x; },
      horizon, dt, seed);
}

}  // namespace regimesim::sde
