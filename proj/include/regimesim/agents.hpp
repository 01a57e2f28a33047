#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "regimesim/kernel.hpp"
#include "regimesim/order_book.hpp"
#include "regimesim/random.hpp"
#include "regimesim/sde.hpp"

namespace regimesim {

// Read-only view of one fundamental path. Queries resolve to the last grid
// point at or before t.
class Oracle {
 public:
  Oracle(std::shared_ptr<const sde::FundamentalPath> path, std::vector<sde::RegimeParams> regimes,
         double observation_noise_sigma = 0.0);

  // X_t plus Normal(0, sigma^2) noise, rounded to integer cents.
  Price observe_fundamental(SimTime t, Rng& rng) const;
  Price observe_fundamental(SimTime t, Rng& rng, double noise_sigma) const;
  double fundamental(SimTime t) const;
  sde::RegimeState current_regime(SimTime t) const;
  // Center slope of the regime active at t.
  double trend(SimTime t) const;

  SimTime horizon() const;
  const sde::FundamentalPath& path() const { return *path_; }

 private:
  std::size_t index_for(SimTime t) const;

  std::shared_ptr<const sde::FundamentalPath> path_;
  std::vector<sde::RegimeParams> regimes_;
  double noise_sigma_;
  SimTime dt_ns_;
};

struct OrderInstruction {
  Side side = Side::Buy;
  OrderType type = OrderType::Limit;
  Price price = 0;
  Qty qty = 0;

  friend bool operator==(const OrderInstruction&, const OrderInstruction&) = default;
};

OrderInstruction limit_order(Side side, Price price, Qty qty);
OrderInstruction market_order(Side side, Qty qty);

// ---------------------------------------------------------------------------
// Background agent decision rules. Pure functions of the observed market.

struct ValueAgentConfig {
  double wake_rate = 1.0 / 600.0;  // wake-ups per second
  Qty order_size = 100;
  double noise_sigma = 10.0;  // observation noise, cents
  int limit_offset_ticks = 0;
};

// Posts one tick inside its own touch, capped by the observed fundamental
// (a cap at the opposite touch makes the order marketable). Abstains when the
// observation equals the mid.
std::vector<OrderInstruction> value_agent_decide(const ValueAgentConfig& cfg,
                                                 const BookSnapshot& book, Price observed,
                                                 Rng& rng);

struct MomentumAgentConfig {
  double wake_rate = 1.0 / 60.0;
  Qty order_size = 20;
  std::size_t short_window = 20;
  std::size_t long_window = 50;
};

std::optional<Side> momentum_signal(std::span<const double> mids, std::size_t short_window,
                                    std::size_t long_window);
std::vector<OrderInstruction> momentum_agent_decide(const MomentumAgentConfig& cfg,
                                                    std::span<const double> mids);

struct NoiseAgentConfig {
  double wake_rate = 1.0 / 2000.0;
  Qty min_size = 1;
  Qty max_size = 50;
  int spread_width_ticks = 5;
  double market_order_prob = 0.05;
};

// `reference` is used when the agent's own side of the book is empty.
std::vector<OrderInstruction> noise_agent_decide(const NoiseAgentConfig& cfg,
                                                 const BookSnapshot& book, Price reference,
                                                 Rng& rng);

struct MarketMakerConfig {
  double wake_period = 10.0;  // seconds
  int levels = 5;
  Qty size = 50;
  int first_level_ticks = 1;  // distance of the innermost quotes from the mid
};

std::vector<OrderInstruction> market_maker_ladder(const MarketMakerConfig& cfg, double mid);

// ---------------------------------------------------------------------------
// Kernel agents.

struct L1Row {
  SimTime time = 0;
  std::optional<Price> best_bid;
  std::optional<Price> best_ask;
  std::optional<Price> last_price;
  Qty last_qty = 0;
};

struct ExchangeConfig {
  // Period of the sampled L1 stream; 0 disables sampling.
  SimTime l1_sample_interval = 0;
};

class ExchangeAgent : public Agent {
 public:
  explicit ExchangeAgent(ExchangeConfig cfg = {}) : cfg_(cfg) {}

  void on_start(Kernel& kernel) override;
  void on_wakeup(Kernel& kernel, const WakeUp& wake) override;
  void on_message(Kernel& kernel, const Message& msg) override;

  const OrderBook& book() const { return book_; }
  const std::vector<L1Row>& l1_stream() const { return l1_; }
  const std::vector<Fill>& fills() const { return fills_; }
  std::size_t rejected_messages() const { return rejected_; }

 private:
  void handle_new_order(Kernel& kernel, AgentId sender, const Order& order);

  ExchangeConfig cfg_;
  OrderBook book_;
  std::vector<L1Row> l1_;
  std::vector<Fill> fills_;
  std::size_t rejected_ = 0;
};

// Answers OracleQuery messages with the current regime.
class OracleAgent : public Agent {
 public:
  explicit OracleAgent(std::shared_ptr<const Oracle> oracle) : oracle_(std::move(oracle)) {}
  void on_message(Kernel& kernel, const Message& msg) override;

 private:
  std::shared_ptr<const Oracle> oracle_;
};

// Shared plumbing for agents that trade through the exchange: order ids,
// market-data requests and tracking of the agent's own resting orders.
class TradingAgent : public Agent {
 public:
  explicit TradingAgent(AgentId exchange) : exchange_(exchange) {}

  void on_start(Kernel& kernel) override;
  void on_message(Kernel& kernel, const Message& msg) override;

  std::size_t orders_sent() const { return orders_sent_; }
  std::size_t outstanding() const { return open_orders_.size(); }

 protected:
  virtual void on_market_data(Kernel& kernel, const MarketDataSnapshotMsg& snap) = 0;
  virtual void on_fill(Kernel& kernel, const FillMsg& fill) {
    (void)kernel;
    (void)fill;
  }
  virtual void on_order_ack(Kernel& kernel, const OrderAckMsg& ack) {
    (void)kernel;
    (void)ack;
  }

  void request_market_data(Kernel& kernel, std::size_t depth = 1);
  OrderId submit(Kernel& kernel, const OrderInstruction& instruction);
  void cancel_all(Kernel& kernel);
  SimTime exponential_delay(double rate);

  Rng rng_;
  AgentId exchange_;

 private:
  std::uint32_t next_local_id_ = 0;
  std::size_t orders_sent_ = 0;
  std::map<OrderId, Qty> open_orders_;
};

class ValueAgent : public TradingAgent {
 public:
  ValueAgent(AgentId exchange, std::shared_ptr<const Oracle> oracle, ValueAgentConfig cfg)
      : TradingAgent(exchange), oracle_(std::move(oracle)), cfg_(cfg) {}

  void on_start(Kernel& kernel) override;
  void on_wakeup(Kernel& kernel, const WakeUp& wake) override;

 protected:
  void on_market_data(Kernel& kernel, const MarketDataSnapshotMsg& snap) override;

 private:
  std::shared_ptr<const Oracle> oracle_;
  ValueAgentConfig cfg_;
};

class MomentumAgent : public TradingAgent {
 public:
  MomentumAgent(AgentId exchange, MomentumAgentConfig cfg) : TradingAgent(exchange), cfg_(cfg) {}

  void on_start(Kernel& kernel) override;
  void on_wakeup(Kernel& kernel, const WakeUp& wake) override;

 protected:
  void on_market_data(Kernel& kernel, const MarketDataSnapshotMsg& snap) override;

 private:
  MomentumAgentConfig cfg_;
  std::deque<double> mids_;
};

class NoiseAgent : public TradingAgent {
 public:
  NoiseAgent(AgentId exchange, NoiseAgentConfig cfg, Price initial_price)
      : TradingAgent(exchange), cfg_(cfg), initial_price_(initial_price) {}

  void on_start(Kernel& kernel) override;
  void on_wakeup(Kernel& kernel, const WakeUp& wake) override;

 protected:
  void on_market_data(Kernel& kernel, const MarketDataSnapshotMsg& snap) override;

 private:
  NoiseAgentConfig cfg_;
  Price initial_price_;
};

class MarketMakerAgent : public TradingAgent {
 public:
  MarketMakerAgent(AgentId exchange, MarketMakerConfig cfg, Price initial_price)
      : TradingAgent(exchange), cfg_(cfg), initial_price_(initial_price) {}

  void on_start(Kernel& kernel) override;
  void on_wakeup(Kernel& kernel, const WakeUp& wake) override;

 protected:
  void on_market_data(Kernel& kernel, const MarketDataSnapshotMsg& snap) override;

 private:
  MarketMakerConfig cfg_;
  Price initial_price_;
};

}  // namespace regimesim
