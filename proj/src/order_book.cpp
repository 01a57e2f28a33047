#include "regimesim/order_book.hpp"

#include <algorithm>
#include <stdexcept>

namespace regimesim {

std::optional<Price> BookSnapshot::best_bid() const {
  if (bids.empty()) return std::nullopt;
  return bids.front().price;
}

std::optional<Price> BookSnapshot::best_ask() const {
  if (asks.empty()) return std::nullopt;
  return asks.front().price;
}

std::optional<double> BookSnapshot::mid() const {
  if (bids.empty() || asks.empty()) return std::nullopt;
  return 0.5 * static_cast<double>(bids.front().price + asks.front().price);
}

std::optional<Price> BookSnapshot::spread() const {
  if (bids.empty() || asks.empty()) return std::nullopt;
  return asks.front().price - bids.front().price;
}

template <class Levels>
void OrderBook::match_against(Levels& levels, Order& taker, SimTime now, SubmitResult& out) {
  const auto marketable = [&](Price level_price) {
    if (taker.type == OrderType::Market) return true;
    return taker.side == Side::Buy ? level_price <= taker.price : level_price >= taker.price;
  };
  while (taker.qty > 0 && !levels.empty()) {
    auto level = levels.begin();
    if (!marketable(level->first)) break;
    auto& queue = level->second;
    while (taker.qty > 0 && !queue.empty()) {
      Order& maker = queue.front();
      const Qty qty = std::min(taker.qty, maker.qty);
      out.fills.push_back(Fill{taker.id, maker.id, taker.agent, maker.agent, taker.side,
                               maker.price, qty, now});
      out.filled += qty;
      taker.qty -= qty;
      maker.qty -= qty;
      last_trade_ = Trade{maker.price, qty, now};
      if (maker.qty == 0) {
        index_.erase(maker.id);
        queue.pop_front();
      }
    }
    if (queue.empty()) levels.erase(level);
  }
}

template <class Levels>
void OrderBook::rest(Levels& levels, const Order& order) {
  auto& queue = levels[order.price];
  queue.push_back(order);
  index_.emplace(order.id, Location{order.side, order.price, std::prev(queue.end())});
}

SubmitResult OrderBook::submit(Order order, SimTime now) {
  if (order.qty <= 0) throw std::invalid_argument("order quantity must be positive");
  if (order.type == OrderType::Limit && order.price <= 0) {
    throw std::invalid_argument("limit price must be positive");
  }
  if (!seen_.insert(order.id).second) throw std::invalid_argument("duplicate order id");
  order.placed_at = now;

  SubmitResult out;
  if (order.side == Side::Buy) {
    match_against(asks_, order, now, out);
  } else {
    match_against(bids_, order, now, out);
  }
  if (order.qty > 0) {
    if (order.type == OrderType::Market) {
      out.cancelled = order.qty;
      out.unfilled_market = true;
    } else {
      out.resting = order.qty;
      if (order.side == Side::Buy) {
        rest(bids_, order);
      } else {
        rest(asks_, order);
      }
    }
  }
  return out;
}

bool OrderBook::cancel(OrderId id) {
  const auto found = index_.find(id);
  if (found == index_.end()) return false;
  const Location loc = found->second;
  index_.erase(found);
  const auto erase_from = [&](auto& levels) {
    auto level = levels.find(loc.price);
    level->second.erase(loc.it);
    if (level->second.empty()) levels.erase(level);
  };
  if (loc.side == Side::Buy) {
    erase_from(bids_);
  } else {
    erase_from(asks_);
  }
  return true;
}

namespace {

template <class Levels>
std::vector<BookLevel> aggregate(const Levels& levels, std::size_t depth) {
  std::vector<BookLevel> out;
  out.reserve(std::min(depth, levels.size()));
  for (const auto& [price, queue] : levels) {
    if (out.size() >= depth) break;
    Qty total = 0;
    for (const auto& o : queue) total += o.qty;
    out.push_back({price, total});
  }
  return out;
}

}  // namespace

BookSnapshot OrderBook::snapshot(std::size_t depth) const {
  return BookSnapshot{aggregate(bids_, depth), aggregate(asks_, depth), last_trade_};
}

std::optional<Price> OrderBook::best_bid() const {
  if (bids_.empty()) return std::nullopt;
  return bids_.begin()->first;
}

std::optional<Price> OrderBook::best_ask() const {
  if (asks_.empty()) return std::nullopt;
  return asks_.begin()->first;
}

Qty OrderBook::remaining(OrderId id) const {
  const auto found = index_.find(id);
  return found == index_.end() ? 0 : found->second.it->qty;
}

std::vector<Order> OrderBook::resting_orders(Side side) const {
  std::vector<Order> out;
  const auto collect = [&](const auto& levels) {
    for (const auto& [price, queue] : levels) out.insert(out.end(), queue.begin(), queue.end());
  };
  if (side == Side::Buy) {
    collect(bids_);
  } else {
    collect(asks_);
  }
  return out;
}

}  // namespace regimesim
