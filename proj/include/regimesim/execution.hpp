#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "regimesim/agents.hpp"
#include "regimesim/kernel.hpp"
#include "regimesim/types.hpp"

namespace regimesim::execution {

enum class Strategy : std::uint8_t { FullMarket, FullLimit, RegimeAware0, RegimeAware1 };

std::string_view to_string(Strategy s);
// Accepts full_MO, full_LO, regime_aware_0, regime_aware_1 (case-insensitive).
Strategy parse_strategy(std::string_view name);
inline constexpr Strategy kAllStrategies[] = {Strategy::FullMarket, Strategy::FullLimit,
                                              Strategy::RegimeAware0, Strategy::RegimeAware1};

struct ParentOrder {
  Side side = Side::Buy;
  Qty quantity = 20000;
  double time_limit = 23.0 * 3600.0;  // seconds
  double period = 60.0;               // seconds between child orders
  int aggregation = 10;               // regime_aware_1 folds this many periods

  void validate() const;
};

struct ChildSlice {
  double time = 0.0;  // seconds from execution start
  Qty qty = 0;

  friend bool operator==(const ChildSlice&, const ChildSlice&) = default;
};

// ceil(T/period) slices at 0, period, 2*period, ... Each slice carries
// Q*period/T shares; the fractional part is carried forward so the integer
// sizes sum to exactly Q.
std::vector<ChildSlice> build_schedule(const ParentOrder& parent);
// regime_aware_1 runs the schedule at period*aggregation.
std::vector<ChildSlice> build_schedule(const ParentOrder& parent, Strategy strategy);

// Splits qty into `parts` integers summing to qty, sizes differing by at most 1.
std::vector<Qty> split_quantity(Qty qty, int parts);

// Passive buy price: best bid, else last trade, else one tick under the ask;
// never at or through the best ask.
std::optional<Price> passive_buy_price(const BookSnapshot& book);

std::vector<OrderInstruction> opm_full_mo(Qty qty, const BookSnapshot& book);
std::vector<OrderInstruction> opm_full_lo(Qty qty, const BookSnapshot& book);
std::vector<OrderInstruction> opm_regime_aware_0(Qty qty, const BookSnapshot& book, bool upward);
// qty is the aggregated slice (k*q). Downward: k limits at bid, bid-1, ...,
// bid-(k-1); levels that would fall below one cent are placed at one cent.
std::vector<OrderInstruction> opm_regime_aware_1(Qty qty, int k, const BookSnapshot& book,
                                                 bool upward);
std::vector<OrderInstruction> place_child(Strategy strategy, Qty qty, int k,
                                          const BookSnapshot& book, bool upward);

struct Execution {
  Price price = 0;
  Qty qty = 0;
  SimTime time = 0;
};

struct EpisodeMetrics {
  std::optional<double> wapr;              // undefined without fills
  double pct_comp = 0.0;
  std::optional<double> normalized_price;  // wapr / arrival mid
  Qty executed = 0;
  std::size_t n_fills = 0;
};

EpisodeMetrics compute_metrics(std::span<const Execution> fills, Qty parent_qty,
                               double arrival_mid);

struct ChildPlacement {
  std::size_t slice = 0;
  SimTime time = 0;
  bool upward = false;
  std::vector<OrderInstruction> orders;

  friend bool operator==(const ChildPlacement&, const ChildPlacement&) = default;
};

struct ExecutionAgentConfig {
  ParentOrder parent;
  Strategy strategy = Strategy::FullMarket;
  SimTime start = 0;  // first slice; the episode ends at start + T
};

// Trades the parent order on a TWAP schedule. Every child goes through the same
// message flow regardless of strategy: oracle query, market data request, then
// order placement.
class ExecutionAgent : public TradingAgent {
 public:
  ExecutionAgent(AgentId exchange, AgentId oracle_agent, ExecutionAgentConfig cfg);

  void on_start(Kernel& kernel) override;
  void on_wakeup(Kernel& kernel, const WakeUp& wake) override;
  void on_message(Kernel& kernel, const Message& msg) override;

  SimTime end_time() const;
  const std::vector<ChildSlice>& schedule() const { return schedule_; }
  const std::vector<ChildPlacement>& placements() const { return placements_; }
  const std::vector<Execution>& executions() const { return executions_; }
  std::optional<double> arrival_mid() const { return arrival_mid_; }
  std::size_t unfilled_market_orders() const { return unfilled_market_; }
  std::size_t skipped_children() const { return skipped_; }

  EpisodeMetrics metrics() const;

 protected:
  void on_market_data(Kernel& kernel, const MarketDataSnapshotMsg& snap) override;
  void on_fill(Kernel& kernel, const FillMsg& fill) override;
  void on_order_ack(Kernel& kernel, const OrderAckMsg& ack) override;

 private:
  AgentId oracle_agent_;
  ExecutionAgentConfig cfg_;
  std::vector<ChildSlice> schedule_;
  std::size_t current_slice_ = 0;
  bool upward_ = false;
  std::optional<double> arrival_mid_;
  std::vector<ChildPlacement> placements_;
  std::vector<Execution> executions_;
  std::size_t unfilled_market_ = 0;
  std::size_t skipped_ = 0;
};

}  // namespace regimesim::execution
