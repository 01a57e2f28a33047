#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "regimesim/random.hpp"

// Regime-switching fundamental processes: continuous-time Markov chain regime
// traces, piecewise-linear centers and Euler-Maruyama path generation for the
// OU family (plain, trending, functional-center, Markov-switching trending).
namespace regimesim::sde {

struct RegimeState {
  std::uint32_t index = 0;

  friend constexpr auto operator<=>(RegimeState, RegimeState) = default;
};

// Square matrix of transition rates in events per second. Diagonal entries are
// self-transition rates: they generate events that leave the label unchanged.
class RateMatrix {
 public:
  RateMatrix() = default;
  explicit RateMatrix(const std::vector<std::vector<double>>& rows);

  // Two-state matrix [[stay, switch], [switch, stay]].
  static RateMatrix symmetric_two_state(double stay_rate, double switch_rate);

  std::size_t size() const { return n_; }
  double operator()(std::size_t from, std::size_t to) const { return entries_[from * n_ + to]; }

  // Total event rate out of `from`, self-transitions included.
  double total_rate(std::size_t from) const;
  // Rate of label-changing transitions out of `from`.
  double switch_rate(std::size_t from) const;

  std::vector<std::vector<double>> rows() const;

 private:
  std::size_t n_ = 0;
  std::vector<double> entries_;
};

struct RegimeParams {
  double theta = 0.0;  // mean-reversion speed, 1/s
  double mu = 0.0;     // slope of the center, price units per second
  double sigma = 0.0;  // diffusion, price units per sqrt(s)
};

struct CtmstouParams {
  std::vector<RegimeParams> regimes;
  RateMatrix rates;
  double x0 = 0.0;
  double m0 = 0.0;
  RegimeState s0{};

  // Throws std::invalid_argument on any violated invariant.
  void validate() const;
};

struct RegimeEvent {
  double time = 0.0;  // seconds
  RegimeState state{};
};

// Every CTMC event up to the horizon, starting with (0, s0). Self-transition
// events are recorded, so consecutive entries may carry the same state.
struct RegimeTrace {
  std::vector<RegimeEvent> events;

  RegimeState state_at(double t) const;
  // Number of events that change the regime label.
  std::size_t switch_count() const;
};

struct FundamentalPath {
  double dt = 1.0;
  std::vector<double> values;             // X
  std::vector<double> centers;            // M
  std::vector<RegimeState> states;        // s on the grid
  RegimeTrace trace;                      // exact (off-grid) event times

  std::size_t size() const { return values.size(); }
  double time_at(std::size_t i) const { return static_cast<double>(i) * dt; }
  double horizon() const { return values.empty() ? 0.0 : time_at(values.size() - 1); }
};

// Number of Euler steps covering [0, horizon] at step dt.
std::size_t step_count(double horizon, double dt);
// Grid points 0, dt, ..., step_count*dt.
std::vector<double> time_grid(double horizon, double dt);

RegimeTrace ctmc_sample_trace(const RateMatrix& rates, RegimeState s0, double horizon, Rng& rng);

// Center value M(t) for a trace; exact piecewise-linear integration of the
// regime slopes.
double center_at(const RegimeTrace& trace, std::span<const RegimeParams> regimes, double m0,
                 double t);
std::vector<double> center_series(const RegimeTrace& trace, std::span<const RegimeParams> regimes,
                                  double m0, std::span<const double> grid);

constexpr double euler_maruyama_step(double x, double drift, double diffusion, double dt,
                                     double dW) {
  return x + drift * dt + diffusion * dW;
}

// n independent Normal(0, dt) increments.
std::vector<double> wiener_increments(std::size_t n, double dt, Rng& rng);

// Generic scalar Euler-Maruyama on a fixed grid. Diffusion increments come from
// the seed's diffusion stream so solvers and exact references can share them.
std::vector<double> euler_maruyama(double x0, const std::function<double(double, double)>& drift,
                                   const std::function<double(double, double)>& diffusion,
                                   double horizon, double dt, std::uint64_t seed);

FundamentalPath generate_ctmstou_path(const CtmstouParams& params, double horizon, double dt,
                                      std::uint64_t seed);
// Same as above with an externally supplied regime trace.
FundamentalPath generate_ctmstou_path(const CtmstouParams& params, const RegimeTrace& trace,
                                      double horizon, double dt, std::uint64_t seed);

std::vector<double> generate_ou_path(double theta, double mu, double sigma, double x0,
                                     double horizon, double dt, std::uint64_t seed);
std::vector<double> generate_tou_path(double theta, double mu, double trend, double sigma,
                                      double x0, double horizon, double dt, std::uint64_t seed);
std::vector<double> generate_fou_path(double theta, const std::function<double(double)>& center,
                                      double sigma, double x0, double horizon, double dt,
                                      std::uint64_t seed);

// Analytic geometric Brownian motion on the diffusion stream of `seed`.
std::vector<double> gbm_exact_path(double s0, double mu, double sigma, double horizon, double dt,
                                   std::uint64_t seed);
// Euler-Maruyama approximation of the same GBM on the same increments.
std::vector<double> gbm_euler_path(double s0, double mu, double sigma, double horizon, double dt,
                                   std::uint64_t seed);

}  // namespace regimesim::sde
