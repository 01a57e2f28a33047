#include "regimesim/execution.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <string>

namespace regimesim::execution {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::FullMarket: return "full_MO";
    case Strategy::FullLimit: return "full_LO";
    case Strategy::RegimeAware0: return "regime_aware_0";
    case Strategy::RegimeAware1: return "regime_aware_1";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (Strategy s : kAllStrategies) {
    std::string candidate(to_string(s));
    std::transform(candidate.begin(), candidate.end(), candidate.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (candidate == lower) return s;
  }
  throw std::invalid_argument("unknown strategy '" + std::string(name) + "'");
}

void ParentOrder::validate() const {
  if (side != Side::Buy) throw std::invalid_argument("only buy parent orders are supported");
  if (quantity <= 0) throw std::invalid_argument("parent quantity must be positive");
  if (!(period > 0.0) || !(period < time_limit)) {
    throw std::invalid_argument("child period must satisfy 0 < period < time limit");
  }
  if (aggregation < 1) throw std::invalid_argument("aggregation factor must be >= 1");
}

namespace {

__extension__ using Wide = __int128;

std::vector<ChildSlice> twap(Qty quantity, double time_limit, double period) {
  const SimTime total = seconds_to_nanos(time_limit);
  const SimTime step = seconds_to_nanos(period);
  if (step <= 0 || step >= total) {
    throw std::invalid_argument("child period must satisfy 0 < period < time limit");
  }
  const SimTime n = (total + step - 1) / step;
  std::vector<ChildSlice> slices;
  slices.reserve(static_cast<std::size_t>(n));
  Qty done = 0;
  for (SimTime i = 0; i < n; ++i) {
    const SimTime covered = std::min((i + 1) * step, total);
    const auto target = static_cast<Qty>(static_cast<Wide>(quantity) * covered / total);
    slices.push_back({nanos_to_seconds(i * step), target - done});
    done = target;
  }
  return slices;
}

}  // namespace

std::vector<ChildSlice> build_schedule(const ParentOrder& parent) {
  parent.validate();
  return twap(parent.quantity, parent.time_limit, parent.period);
}

std::vector<ChildSlice> build_schedule(const ParentOrder& parent, Strategy strategy) {
  parent.validate();
  if (strategy == Strategy::RegimeAware1 && parent.aggregation > 1) {
    const double folded = parent.period * parent.aggregation;
    if (folded >= parent.time_limit) {
      throw std::invalid_argument("aggregated period must be shorter than the time limit");
    }
    return twap(parent.quantity, parent.time_limit, folded);
  }
  return twap(parent.quantity, parent.time_limit, parent.period);
}

std::vector<Qty> split_quantity(Qty qty, int parts) {
  if (parts < 1) throw std::invalid_argument("parts must be >= 1");
  std::vector<Qty> out;
  out.reserve(static_cast<std::size_t>(parts));
  Qty done = 0;
  for (int j = 0; j < parts; ++j) {
    const Qty target = qty * (j + 1) / parts;
    out.push_back(target - done);
    done = target;
  }
  return out;
}

std::optional<Price> passive_buy_price(const BookSnapshot& book) {
  std::optional<Price> p = book.best_bid();
  if (!p && book.last_trade) p = book.last_trade->price;
  const auto ask = book.best_ask();
  if (!p && ask) p = *ask - 1;
  if (p && ask) p = std::min(*p, *ask - 1);
  if (p && *p < 1) return std::nullopt;
  return p;
}

std::vector<OrderInstruction> opm_full_mo(Qty qty, const BookSnapshot&) {
  if (qty <= 0) return {};
  return {market_order(Side::Buy, qty)};
}

std::vector<OrderInstruction> opm_full_lo(Qty qty, const BookSnapshot& book) {
  if (qty <= 0) return {};
  const auto price = passive_buy_price(book);
  if (!price) return {};
  return {limit_order(Side::Buy, *price, qty)};
}

std::vector<OrderInstruction> opm_regime_aware_0(Qty qty, const BookSnapshot& book, bool upward) {
  return upward ? opm_full_mo(qty, book) : opm_full_lo(qty, book);
}

std::vector<OrderInstruction> opm_regime_aware_1(Qty qty, int k, const BookSnapshot& book,
                                                 bool upward) {
  if (qty <= 0) return {};
  if (upward) return opm_full_mo(qty, book);
  const auto top = passive_buy_price(book);
  if (!top) return {};
  std::vector<OrderInstruction> out;
  const auto sizes = split_quantity(qty, k);
  for (int j = 0; j < k; ++j) {
    if (sizes[static_cast<std::size_t>(j)] <= 0) continue;
    out.push_back(limit_order(Side::Buy, std::max<Price>(*top - j, 1),
                              sizes[static_cast<std::size_t>(j)]));
  }
  return out;
}

std::vector<OrderInstruction> place_child(Strategy strategy, Qty qty, int k,
                                          const BookSnapshot& book, bool upward) {
  switch (strategy) {
    case Strategy::FullMarket: return opm_full_mo(qty, book);
    case Strategy::FullLimit: return opm_full_lo(qty, book);
    case Strategy::RegimeAware0: return opm_regime_aware_0(qty, book, upward);
    case Strategy::RegimeAware1: return opm_regime_aware_1(qty, k, book, upward);
  }
  return {};
}

EpisodeMetrics compute_metrics(std::span<const Execution> fills, Qty parent_qty,
                               double arrival_mid) {
  if (parent_qty <= 0) throw std::invalid_argument("parent quantity must be positive");
  if (!(arrival_mid > 0.0)) throw std::invalid_argument("arrival mid must be positive");
  EpisodeMetrics m;
  double notional = 0.0;
  for (const auto& f : fills) {
    m.executed += f.qty;
    notional += static_cast<double>(f.qty) * static_cast<double>(f.price);
  }
  m.n_fills = fills.size();
  m.pct_comp = static_cast<double>(m.executed) / static_cast<double>(parent_qty);
  if (m.executed > 0) {
    m.wapr = notional / static_cast<double>(m.executed);
    m.normalized_price = *m.wapr / arrival_mid;
  }
  return m;
}

// ---------------------------------------------------------------------------

ExecutionAgent::ExecutionAgent(AgentId exchange, AgentId oracle_agent, ExecutionAgentConfig cfg)
    : TradingAgent(exchange),
      oracle_agent_(oracle_agent),
      cfg_(cfg),
      schedule_(build_schedule(cfg.parent, cfg.strategy)) {}

SimTime ExecutionAgent::end_time() const {
  return cfg_.start + seconds_to_nanos(cfg_.parent.time_limit);
}

void ExecutionAgent::on_start(Kernel& kernel) {
  TradingAgent::on_start(kernel);
  if (!schedule_.empty()) {
    kernel.schedule_wakeup(id(), cfg_.start + seconds_to_nanos(schedule_.front().time), 0);
  }
}

void ExecutionAgent::on_wakeup(Kernel& kernel, const WakeUp& wake) {
  current_slice_ = static_cast<std::size_t>(wake.tag);
  const std::size_t next = current_slice_ + 1;
  if (next < schedule_.size()) {
    kernel.schedule_wakeup(id(), cfg_.start + seconds_to_nanos(schedule_[next].time),
                           static_cast<std::int64_t>(next));
  }
  // The oracle answers with zero latency.
  kernel.send(Message{id(), oracle_agent_, OracleQueryMsg{}}, 0);
}

void ExecutionAgent::on_message(Kernel& kernel, const Message& msg) {
  if (msg.kind() == MessageKind::OracleReply) {
    upward_ = std::get<OracleReplyMsg>(msg.body).trend > 0.0;
    request_market_data(kernel);
    return;
  }
  TradingAgent::on_message(kernel, msg);
}

void ExecutionAgent::on_market_data(Kernel& kernel, const MarketDataSnapshotMsg& snap) {
  if (!arrival_mid_) {
    if (const auto mid = snap.book.mid()) arrival_mid_ = *mid;
  }
  if (kernel.now() > end_time()) return;
  const Qty qty = schedule_[current_slice_].qty;
  auto orders = place_child(cfg_.strategy, qty, cfg_.parent.aggregation, snap.book, upward_);
  if (orders.empty() && qty > 0) ++skipped_;
  for (const auto& ins : orders) submit(kernel, ins);
  placements_.push_back(ChildPlacement{current_slice_, kernel.now(), upward_, std::move(orders)});
}

void ExecutionAgent::on_fill(Kernel&, const FillMsg& fill) {
  if (fill.time <= end_time()) executions_.push_back({fill.price, fill.qty, fill.time});
}

void ExecutionAgent::on_order_ack(Kernel&, const OrderAckMsg& ack) {
  if (ack.unfilled_market) ++unfilled_market_;
}

EpisodeMetrics ExecutionAgent::metrics() const {
  if (arrival_mid_ && *arrival_mid_ > 0.0) {
    return compute_metrics(executions_, cfg_.parent.quantity, *arrival_mid_);
  }
  // Without an arrival mid only the completion figures are defined.
  EpisodeMetrics m = compute_metrics(executions_, cfg_.parent.quantity, 1.0);
  m.normalized_price.reset();
  return m;
}

}  // namespace regimesim::execution
