#pragma once

#include <cstddef>
#include <functional>
#include <list>
#include <map>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "regimesim/types.hpp"

namespace regimesim {

enum class OrderType : std::uint8_t { Limit, Market };

struct Order {
  OrderId id = 0;
  AgentId agent = 0;
  Side side = Side::Buy;
  OrderType type = OrderType::Limit;
  Price price = 0;  // ignored for market orders
  Qty qty = 0;
  SimTime placed_at = 0;
};

struct Fill {
  OrderId taker_order = 0;
  OrderId maker_order = 0;
  AgentId taker_agent = 0;
  AgentId maker_agent = 0;
  Side taker_side = Side::Buy;
  Price price = 0;
  Qty qty = 0;
  SimTime time = 0;
};

struct Trade {
  Price price = 0;
  Qty qty = 0;
  SimTime time = 0;
};

struct SubmitResult {
  std::vector<Fill> fills;
  Qty filled = 0;
  Qty resting = 0;
  Qty cancelled = 0;  // unfilled market remainder
  // A market order that found no (or not enough) opposite liquidity.
  bool unfilled_market = false;
};

struct BookLevel {
  Price price = 0;
  Qty qty = 0;

  friend bool operator==(const BookLevel&, const BookLevel&) = default;
};

struct BookSnapshot {
  std::vector<BookLevel> bids;  // best first
  std::vector<BookLevel> asks;  // best first
  std::optional<Trade> last_trade;

  std::optional<Price> best_bid() const;
  std::optional<Price> best_ask() const;
  std::optional<double> mid() const;
  std::optional<Price> spread() const;
};

// Single-instrument limit order book, price-time priority, trades at the
// resting order's price. Market orders never rest. No self-trade prevention.
class OrderBook {
 public:
  // Throws std::invalid_argument for qty <= 0, non-positive limit price or a
  // duplicate order id.
  SubmitResult submit(Order order, SimTime now);
  // False when the id is unknown, already filled or already cancelled.
  bool cancel(OrderId id);

  BookSnapshot snapshot(std::size_t depth) const;

  std::optional<Price> best_bid() const;
  std::optional<Price> best_ask() const;
  std::optional<Trade> last_trade() const { return last_trade_; }

  bool contains(OrderId id) const { return index_.contains(id); }
  std::size_t resting_count() const { return index_.size(); }
  // Resting remainder of an order, 0 if not resting.
  Qty remaining(OrderId id) const;

  // Resting orders of one side in priority order (best price first, FIFO).
  std::vector<Order> resting_orders(Side side) const;

 private:
  using Queue = std::list<Order>;
  using BidLevels = std::map<Price, Queue, std::greater<>>;
  using AskLevels = std::map<Price, Queue, std::less<>>;

  struct Location {
    Side side;
    Price price;
    Queue::iterator it;
  };

  template <class Levels>
  void match_against(Levels& levels, Order& taker, SimTime now, SubmitResult& out);
  template <class Levels>
  void rest(Levels& levels, const Order& order);

  BidLevels bids_;
  AskLevels asks_;
  std::unordered_map<OrderId, Location> index_;
  std::unordered_set<OrderId> seen_;
  std::optional<Trade> last_trade_;
};

}  // namespace regimesim
