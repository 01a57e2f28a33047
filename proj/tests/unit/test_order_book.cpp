#include <gtest/gtest.h>

#include "regimesim/order_book.hpp"
#include "reference_book.hpp"

using namespace regimesim;

namespace {

Order limit(OrderId id, Side side, Price px, Qty q, AgentId agent = 0) {
  return Order{id, agent, side, OrderType::Limit, px, q, 0};
}

Order market(OrderId id, Side side, Qty q, AgentId agent = 0) {
  return Order{id, agent, side, OrderType::Market, 0, q, 0};
}

}  // namespace

TEST(OrderBook, RestsNonMarketableLimits) {
  OrderBook b;
  auto r = b.submit(limit(1, Side::Buy, 99, 5), 1);
  EXPECT_EQ(r.resting, 5);
  EXPECT_TRUE(r.fills.empty());
  b.submit(limit(2, Side::Sell, 101, 7), 2);
  EXPECT_EQ(b.best_bid(), 99);
  EXPECT_EQ(b.best_ask(), 101);
  const auto s = b.snapshot(5);
  EXPECT_EQ(*s.mid(), 100.0);
  EXPECT_EQ(*s.spread(), 2);
  EXPECT_FALSE(s.last_trade.has_value());
}

TEST(OrderBook, TradesAtMakerPriceInTimePriority) {
  OrderBook b;
  b.submit(limit(1, Side::Sell, 101, 3, 7), 1);
  b.submit(limit(2, Side::Sell, 101, 4, 8), 2);
  b.submit(limit(3, Side::Sell, 100, 2, 9), 3);
  const auto r = b.submit(limit(4, Side::Buy, 102, 6), 4);
  ASSERT_EQ(r.fills.size(), 3u);
  EXPECT_EQ(r.fills[0].maker_order, 3u);
  EXPECT_EQ(r.fills[0].price, 100);
  EXPECT_EQ(r.fills[1].maker_order, 1u);
  EXPECT_EQ(r.fills[1].qty, 3);
  EXPECT_EQ(r.fills[2].maker_order, 2u);
  EXPECT_EQ(r.fills[2].qty, 1);
  EXPECT_EQ(r.fills[2].price, 101);
  EXPECT_EQ(r.filled, 6);
  EXPECT_EQ(r.resting, 0);
  EXPECT_EQ(b.remaining(2), 3);
  EXPECT_EQ(b.last_trade()->price, 101);
  EXPECT_EQ(b.last_trade()->qty, 1);
}

TEST(OrderBook, MarketOrderRemainderIsCancelled) {
  OrderBook b;
  b.submit(limit(1, Side::Buy, 99, 4), 1);
  const auto r = b.submit(market(2, Side::Sell, 10), 2);
  EXPECT_EQ(r.filled, 4);
  EXPECT_EQ(r.cancelled, 6);
  EXPECT_TRUE(r.unfilled_market);
  EXPECT_EQ(b.resting_count(), 0u);
  const auto empty = b.submit(market(3, Side::Sell, 1), 3);
  EXPECT_TRUE(empty.unfilled_market);
  EXPECT_EQ(empty.filled, 0);
}

TEST(OrderBook, CancelRemovesOnce) {
  OrderBook b;
  b.submit(limit(1, Side::Buy, 99, 4), 1);
  b.submit(limit(2, Side::Buy, 99, 6), 1);
  EXPECT_TRUE(b.cancel(1));
  EXPECT_FALSE(b.cancel(1));
  EXPECT_FALSE(b.cancel(42));
  EXPECT_EQ(b.snapshot(1).bids.front(), (BookLevel{99, 6}));
  b.submit(market(3, Side::Sell, 6), 2);
  EXPECT_FALSE(b.cancel(2));
  EXPECT_FALSE(b.best_bid().has_value());
}

TEST(OrderBook, RejectsMalformedOrders) {
  OrderBook b;
  EXPECT_THROW(b.submit(limit(1, Side::Buy, 99, 0), 0), std::invalid_argument);
  EXPECT_THROW(b.submit(limit(2, Side::Buy, 0, 1), 0), std::invalid_argument);
  b.submit(limit(3, Side::Buy, 99, 1), 0);
  EXPECT_THROW(b.submit(limit(3, Side::Buy, 98, 1), 0), std::invalid_argument);
  b.cancel(3);
  EXPECT_THROW(b.submit(limit(3, Side::Buy, 98, 1), 0), std::invalid_argument);
}

TEST(OrderBook, SnapshotDepthAndOrdering) {
  OrderBook b;
  OrderId id = 1;
  for (Price p = 90; p < 95; ++p) b.submit(limit(id++, Side::Buy, p, p - 89), 0);
  for (Price p = 100; p < 105; ++p) b.submit(limit(id++, Side::Sell, p, 1), 0);
  const auto s = b.snapshot(3);
  ASSERT_EQ(s.bids.size(), 3u);
  EXPECT_EQ(s.bids[0], (BookLevel{94, 5}));
  EXPECT_EQ(s.bids[2], (BookLevel{92, 3}));
  EXPECT_EQ(s.asks[0].price, 100);
  EXPECT_EQ(s.asks[2].price, 102);
  EXPECT_EQ(b.snapshot(0).bids.size(), 0u);
}

TEST(OrderBook, MatchesNaiveReferenceOnRandomStreams) {
  std::mt19937_64 rng(20240611);
  for (int rep = 0; rep < 200; ++rep) {
    OrderBook book;
    regimesim::testing::ReferenceBook ref;
    const auto ops = regimesim::testing::random_book_ops(rng, 200);
    for (const auto& op : ops) {
      if (op.is_cancel) {
        ASSERT_EQ(book.cancel(op.cancel_id), ref.cancel(op.cancel_id));
        continue;
      }
      const auto a = book.submit(op.order, op.time);
      const auto e = ref.submit(op.order, op.time);
      ASSERT_EQ(a.filled, e.filled);
      ASSERT_EQ(a.resting, e.resting);
      ASSERT_EQ(a.cancelled, e.cancelled);
      ASSERT_EQ(a.fills.size(), e.fills.size());
      for (std::size_t i = 0; i < a.fills.size(); ++i) {
        ASSERT_EQ(a.fills[i].maker_order, e.fills[i].maker_order);
        ASSERT_EQ(a.fills[i].price, e.fills[i].price);
        ASSERT_EQ(a.fills[i].qty, e.fills[i].qty);
      }
      const auto s = book.snapshot(1000);
      ASSERT_EQ(s.bids, ref.levels(Side::Buy));
      ASSERT_EQ(s.asks, ref.levels(Side::Sell));
      if (s.best_bid() && s.best_ask()) ASSERT_LT(*s.best_bid(), *s.best_ask());
    }
  }
}
