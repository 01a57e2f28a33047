#include "regimesim/agents.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace regimesim {

Oracle::Oracle(std::shared_ptr<const sde::FundamentalPath> path,
               std::vector<sde::RegimeParams> regimes, double observation_noise_sigma)
    : path_(std::move(path)),
      regimes_(std::move(regimes)),
      noise_sigma_(observation_noise_sigma),
      dt_ns_(seconds_to_nanos(path_ ? path_->dt : 0.0)) {
  if (!path_ || path_->values.empty()) throw std::invalid_argument("oracle needs a non-empty path");
  if (dt_ns_ <= 0) throw std::invalid_argument("oracle path dt must be at least one nanosecond");
  if (!(observation_noise_sigma >= 0.0)) {
    throw std::invalid_argument("observation noise must be non-negative");
  }
}

SimTime Oracle::horizon() const {
  return static_cast<SimTime>(path_->values.size() - 1) * dt_ns_;
}

std::size_t Oracle::index_for(SimTime t) const {
  if (t < 0 || t > horizon()) {
    throw std::out_of_range("oracle query at " + std::to_string(t) +
                            " ns is outside the fundamental horizon");
  }
  return static_cast<std::size_t>(t / dt_ns_);
}

double Oracle::fundamental(SimTime t) const { return path_->values[index_for(t)]; }

Price Oracle::observe_fundamental(SimTime t, Rng& rng) const {
  return observe_fundamental(t, rng, noise_sigma_);
}

Price Oracle::observe_fundamental(SimTime t, Rng& rng, double noise_sigma) const {
  double x = fundamental(t);
  if (noise_sigma > 0.0) x += std::normal_distribution<double>(0.0, noise_sigma)(rng);
  return static_cast<Price>(std::llround(x));
}

sde::RegimeState Oracle::current_regime(SimTime t) const { return path_->states[index_for(t)]; }

double Oracle::trend(SimTime t) const {
  const auto s = current_regime(t);
  return s.index < regimes_.size() ? regimes_[s.index].mu : 0.0;
}

OrderInstruction limit_order(Side side, Price price, Qty qty) {
  return OrderInstruction{side, OrderType::Limit, price, qty};
}

OrderInstruction market_order(Side side, Qty qty) {
  return OrderInstruction{side, OrderType::Market, 0, qty};
}

std::vector<OrderInstruction> value_agent_decide(const ValueAgentConfig& cfg,
                                                 const BookSnapshot& book, Price observed,
                                                 Rng& rng) {
  const auto bid = book.best_bid();
  const auto ask = book.best_ask();
  const Price offset = cfg.limit_offset_ticks;

  if (!bid || !ask) {
    // No two-sided mid: quote around the observation itself.
    const bool buy = std::bernoulli_distribution(0.5)(rng);
    if (buy) {
      Price p = observed - 1 - offset;
      if (ask) p = std::min(p, *ask);
      return {limit_order(Side::Buy, std::max<Price>(p, 1), cfg.order_size)};
    }
    Price p = observed + 1 + offset;
    if (bid) p = std::max(p, *bid);
    return {limit_order(Side::Sell, std::max<Price>(p, 1), cfg.order_size)};
  }

  const double mid = 0.5 * static_cast<double>(*bid + *ask);
  const double f = static_cast<double>(observed);
  if (f > mid) {
    const Price inside = std::min(*bid + 1, *ask);
    const Price p = std::min(observed, inside) - offset;
    return {limit_order(Side::Buy, std::max<Price>(p, 1), cfg.order_size)};
  }
  if (f < mid) {
    const Price inside = std::max(*ask - 1, *bid);
    const Price p = std::max(observed, inside) + offset;
    return {limit_order(Side::Sell, std::max<Price>(p, 1), cfg.order_size)};
  }
  return {};
}

std::optional<Side> momentum_signal(std::span<const double> mids, std::size_t short_window,
                                    std::size_t long_window) {
  if (short_window == 0 || long_window == 0 || mids.size() < long_window ||
      mids.size() < short_window) {
    return std::nullopt;
  }
  const auto mean_tail = [&](std::size_t w) {
    const auto tail = mids.last(w);
    return std::accumulate(tail.begin(), tail.end(), 0.0) / static_cast<double>(w);
  };
  const double fast = mean_tail(short_window);
  const double slow = mean_tail(long_window);
  if (fast > slow) return Side::Buy;
  if (fast < slow) return Side::Sell;
  return std::nullopt;
}

std::vector<OrderInstruction> momentum_agent_decide(const MomentumAgentConfig& cfg,
                                                    std::span<const double> mids) {
  const auto side = momentum_signal(mids, cfg.short_window, cfg.long_window);
  if (!side) return {};
  return {market_order(*side, cfg.order_size)};
}

std::vector<OrderInstruction> noise_agent_decide(const NoiseAgentConfig& cfg,
                                                 const BookSnapshot& book, Price reference,
                                                 Rng& rng) {
  const Side side = std::bernoulli_distribution(0.5)(rng) ? Side::Buy : Side::Sell;
  const Qty qty = std::uniform_int_distribution<Qty>(cfg.min_size, cfg.max_size)(rng);
  if (std::bernoulli_distribution(cfg.market_order_prob)(rng)) return {market_order(side, qty)};

  const int w = cfg.spread_width_ticks;
  const Price shift = std::uniform_int_distribution<Price>(-w, w)(rng);
  Price p = 0;
  if (side == Side::Buy) {
    p = book.best_bid().value_or(reference) + shift;
    if (const auto ask = book.best_ask()) p = std::min(p, *ask - 1);
  } else {
    p = book.best_ask().value_or(reference) + shift;
    if (const auto bid = book.best_bid()) p = std::max(p, *bid + 1);
  }
  return {limit_order(side, std::max<Price>(p, 1), qty)};
}

std::vector<OrderInstruction> market_maker_ladder(const MarketMakerConfig& cfg, double mid) {
  std::vector<OrderInstruction> out;
  out.reserve(static_cast<std::size_t>(2 * std::max(cfg.levels, 0)));
  const Price off = std::max(cfg.first_level_ticks, 1);
  const Price top_bid = static_cast<Price>(std::ceil(mid)) - off;
  const Price top_ask = static_cast<Price>(std::floor(mid)) + off;
  for (int i = 0; i < cfg.levels; ++i) {
    if (top_bid - i >= 1) out.push_back(limit_order(Side::Buy, top_bid - i, cfg.size));
  }
  for (int i = 0; i < cfg.levels; ++i) {
    out.push_back(limit_order(Side::Sell, top_ask + i, cfg.size));
  }
  return out;
}

// ---------------------------------------------------------------------------

void ExchangeAgent::on_start(Kernel& kernel) {
  if (cfg_.l1_sample_interval > 0) kernel.schedule_wakeup(id(), 0);
}

void ExchangeAgent::on_wakeup(Kernel& kernel, const WakeUp&) {
  const auto last = book_.last_trade();
  l1_.push_back(L1Row{kernel.now(), book_.best_bid(), book_.best_ask(),
                      last ? std::optional<Price>(last->price) : std::nullopt,
                      last ? last->qty : 0});
  kernel.schedule_wakeup(id(), kernel.now() + cfg_.l1_sample_interval);
}

void ExchangeAgent::handle_new_order(Kernel& kernel, AgentId sender, const Order& order) {
  SubmitResult result;
  try {
    if (order.agent != sender) throw std::invalid_argument("order agent does not match sender");
    result = book_.submit(order, kernel.now());
  } catch (const std::invalid_argument& e) {
    ++rejected_;
    OrderAckMsg ack;
    ack.order_id = order.id;
    ack.status = AckStatus::Rejected;
    ack.reason = e.what();
    kernel.send(Message{id(), sender, std::move(ack)});
    return;
  }
  kernel.send(Message{id(), sender,
                      OrderAckMsg{order.id, AckStatus::Accepted, result.filled, result.resting,
                                  result.cancelled, result.unfilled_market, {}}});
  for (const Fill& f : result.fills) {
    fills_.push_back(f);
    kernel.send(Message{id(), f.taker_agent,
                        FillMsg{f.taker_order, f.maker_order, f.taker_side, f.price, f.qty, f.time,
                                true}});
    kernel.send(Message{id(), f.maker_agent,
                        FillMsg{f.maker_order, f.taker_order, opposite(f.taker_side), f.price,
                                f.qty, f.time, false}});
  }
}

void ExchangeAgent::on_message(Kernel& kernel, const Message& msg) {
  switch (msg.kind()) {
    case MessageKind::NewOrder:
      handle_new_order(kernel, msg.sender, std::get<NewOrderMsg>(msg.body).order);
      break;
    case MessageKind::CancelOrder:
      book_.cancel(std::get<CancelOrderMsg>(msg.body).order_id);
      break;
    case MessageKind::MarketDataRequest: {
      const auto depth = std::get<MarketDataRequestMsg>(msg.body).depth;
      kernel.send(Message{id(), msg.sender, MarketDataSnapshotMsg{book_.snapshot(depth), kernel.now()}});
      break;
    }
    default:
      ++rejected_;
      break;
  }
}

void OracleAgent::on_message(Kernel& kernel, const Message& msg) {
  if (msg.kind() != MessageKind::OracleQuery) return;
  const SimTime t = std::min(kernel.now(), oracle_->horizon());
  kernel.send(Message{id(), msg.sender,
                      OracleReplyMsg{oracle_->current_regime(t), oracle_->trend(t), kernel.now()}},
              0);
}

// ---------------------------------------------------------------------------

void TradingAgent::on_start(Kernel& kernel) { rng_.seed(kernel.agent_seed(id())); }

void TradingAgent::on_message(Kernel& kernel, const Message& msg) {
  switch (msg.kind()) {
    case MessageKind::MarketDataSnapshot:
      on_market_data(kernel, std::get<MarketDataSnapshotMsg>(msg.body));
      break;
    case MessageKind::OrderAck: {
      const auto& ack = std::get<OrderAckMsg>(msg.body);
      if (ack.status == AckStatus::Rejected || ack.resting == 0) {
        open_orders_.erase(ack.order_id);
      } else if (auto it = open_orders_.find(ack.order_id); it != open_orders_.end()) {
        it->second = ack.resting;
      }
      on_order_ack(kernel, ack);
      break;
    }
    case MessageKind::Fill: {
      const auto& fill = std::get<FillMsg>(msg.body);
      if (!fill.aggressor) {
        if (auto it = open_orders_.find(fill.order_id); it != open_orders_.end()) {
          it->second -= fill.qty;
          if (it->second <= 0) open_orders_.erase(it);
        }
      }
      on_fill(kernel, fill);
      break;
    }
    default:
      break;
  }
}

void TradingAgent::request_market_data(Kernel& kernel, std::size_t depth) {
  kernel.send(Message{id(), exchange_, MarketDataRequestMsg{depth}});
}

OrderId TradingAgent::submit(Kernel& kernel, const OrderInstruction& instruction) {
  const OrderId oid = (static_cast<OrderId>(id()) << 32) | next_local_id_++;
  Order order{oid, id(), instruction.side, instruction.type, instruction.price, instruction.qty,
              kernel.now()};
  if (instruction.type == OrderType::Limit) open_orders_.emplace(oid, instruction.qty);
  ++orders_sent_;
  kernel.send(Message{id(), exchange_, NewOrderMsg{order}});
  return oid;
}

void TradingAgent::cancel_all(Kernel& kernel) {
  for (const auto& [oid, qty] : open_orders_) {
    kernel.send(Message{id(), exchange_, CancelOrderMsg{oid}});
  }
  open_orders_.clear();
}

SimTime TradingAgent::exponential_delay(double rate) {
  const double seconds = std::exponential_distribution<double>(rate)(rng_);
  return std::max<SimTime>(1, seconds_to_nanos(seconds));
}

void ValueAgent::on_start(Kernel& kernel) {
  TradingAgent::on_start(kernel);
  kernel.schedule_wakeup(id(), exponential_delay(cfg_.wake_rate));
}

void ValueAgent::on_wakeup(Kernel& kernel, const WakeUp&) {
  request_market_data(kernel);
  kernel.schedule_wakeup(id(), kernel.now() + exponential_delay(cfg_.wake_rate));
}

void ValueAgent::on_market_data(Kernel& kernel, const MarketDataSnapshotMsg& snap) {
  if (kernel.now() > oracle_->horizon()) return;
  cancel_all(kernel);
  const Price observed = oracle_->observe_fundamental(kernel.now(), rng_, cfg_.noise_sigma);
  for (const auto& ins : value_agent_decide(cfg_, snap.book, observed, rng_)) submit(kernel, ins);
}

void MomentumAgent::on_start(Kernel& kernel) {
  TradingAgent::on_start(kernel);
  kernel.schedule_wakeup(id(), exponential_delay(cfg_.wake_rate));
}

void MomentumAgent::on_wakeup(Kernel& kernel, const WakeUp&) {
  request_market_data(kernel);
  kernel.schedule_wakeup(id(), kernel.now() + exponential_delay(cfg_.wake_rate));
}

void MomentumAgent::on_market_data(Kernel& kernel, const MarketDataSnapshotMsg& snap) {
  if (const auto mid = snap.book.mid()) {
    mids_.push_back(*mid);
    while (mids_.size() > std::max(cfg_.long_window, cfg_.short_window)) mids_.pop_front();
  }
  const std::vector<double> history(mids_.begin(), mids_.end());
  for (const auto& ins : momentum_agent_decide(cfg_, history)) submit(kernel, ins);
}

void NoiseAgent::on_start(Kernel& kernel) {
  TradingAgent::on_start(kernel);
  kernel.schedule_wakeup(id(), exponential_delay(cfg_.wake_rate));
}

void NoiseAgent::on_wakeup(Kernel& kernel, const WakeUp&) {
  request_market_data(kernel);
  kernel.schedule_wakeup(id(), kernel.now() + exponential_delay(cfg_.wake_rate));
}

void NoiseAgent::on_market_data(Kernel& kernel, const MarketDataSnapshotMsg& snap) {
  cancel_all(kernel);
  const Price reference = snap.book.last_trade ? snap.book.last_trade->price : initial_price_;
  for (const auto& ins : noise_agent_decide(cfg_, snap.book, reference, rng_)) submit(kernel, ins);
}

void MarketMakerAgent::on_start(Kernel& kernel) {
  TradingAgent::on_start(kernel);
  kernel.schedule_wakeup(id(), 0);
}

void MarketMakerAgent::on_wakeup(Kernel& kernel, const WakeUp&) {
  request_market_data(kernel);
  kernel.schedule_wakeup(id(), kernel.now() + seconds_to_nanos(cfg_.wake_period));
}

void MarketMakerAgent::on_market_data(Kernel& kernel, const MarketDataSnapshotMsg& snap) {
  cancel_all(kernel);
  double mid = static_cast<double>(initial_price_);
  if (const auto m = snap.book.mid()) {
    mid = *m;
  } else if (snap.book.last_trade) {
    mid = static_cast<double>(snap.book.last_trade->price);
  }
  for (const auto& ins : market_maker_ladder(cfg_, mid)) submit(kernel, ins);
}

}  // namespace regimesim
