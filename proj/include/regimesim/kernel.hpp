#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "regimesim/order_book.hpp"
#include "regimesim/sde.hpp"
#include "regimesim/types.hpp"

namespace regimesim {

enum class MessageKind : std::uint8_t {
  NewOrder,
  CancelOrder,
  OrderAck,
  Fill,
  MarketDataRequest,
  MarketDataSnapshot,
  OracleQuery,
  OracleReply,
};

std::string_view to_string(MessageKind kind);

struct NewOrderMsg {
  Order order;
};

struct CancelOrderMsg {
  OrderId order_id = 0;
};

enum class AckStatus : std::uint8_t { Accepted, Rejected };

struct OrderAckMsg {
  OrderId order_id = 0;
  AckStatus status = AckStatus::Accepted;
  Qty filled = 0;
  Qty resting = 0;
  Qty cancelled = 0;
  bool unfilled_market = false;
  std::string reason;
};

// One side's view of a match.
struct FillMsg {
  OrderId order_id = 0;
  OrderId counterparty_order = 0;
  Side side = Side::Buy;
  Price price = 0;
  Qty qty = 0;
  SimTime time = 0;
  bool aggressor = false;
};

struct MarketDataRequestMsg {
  std::size_t depth = 1;
};

struct MarketDataSnapshotMsg {
  BookSnapshot book;
  SimTime as_of = 0;
};

struct OracleQueryMsg {};

struct OracleReplyMsg {
  sde::RegimeState regime{};
  double trend = 0.0;  // center slope of the current regime
  SimTime as_of = 0;
};

// Alternative order matches MessageKind.
using MessageBody = std::variant<NewOrderMsg, CancelOrderMsg, OrderAckMsg, FillMsg,
                                 MarketDataRequestMsg, MarketDataSnapshotMsg, OracleQueryMsg,
                                 OracleReplyMsg>;

struct Message {
  AgentId sender = 0;
  AgentId recipient = 0;
  MessageBody body;

  MessageKind kind() const { return static_cast<MessageKind>(body.index()); }
};

struct WakeUp {
  std::int64_t tag = 0;
};

struct Event {
  SimTime fire_at = 0;
  std::uint64_t seq = 0;
  AgentId target = 0;
  std::variant<WakeUp, Message> payload;
};

struct EventRecord {
  SimTime time = 0;
  std::uint64_t seq = 0;
  AgentId target = 0;
  std::string_view kind;  // "WakeUp" or a MessageKind name

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

class Kernel;

class Agent {
 public:
  virtual ~Agent() = default;

  AgentId id() const { return id_; }

  // Called once at time 0, in registration order, before any event.
  virtual void on_start(Kernel& kernel) { (void)kernel; }
  virtual void on_wakeup(Kernel& kernel, const WakeUp& wake) {
    (void)kernel;
    (void)wake;
  }
  virtual void on_message(Kernel& kernel, const Message& msg) {
    (void)kernel;
    (void)msg;
  }

 private:
  friend class Kernel;
  AgentId id_ = 0;
};

// Raised when an agent handler throws; carries the event context.
class KernelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KernelConfig {
  std::uint64_t seed = 0;
  SimTime default_latency = kNanosPerMicro;
};

struct KernelSummary {
  std::uint64_t events_processed = 0;
  SimTime final_time = 0;
};

// Single-threaded discrete-event loop. Events are processed in (fire_at, seq)
// order; seq is the insertion counter, so equal timestamps resolve FIFO.
class Kernel {
 public:
  explicit Kernel(KernelConfig config = {});

  AgentId register_agent(std::shared_ptr<Agent> agent);
  std::size_t agent_count() const { return agents_.size(); }
  Agent& agent(AgentId id);

  std::uint64_t agent_seed(AgentId id) const;

  void set_latency(AgentId from, AgentId to, SimTime latency);
  SimTime latency(AgentId from, AgentId to) const;

  // Returns the assigned sequence number.
  std::uint64_t schedule(SimTime fire_at, AgentId target, std::variant<WakeUp, Message> payload);
  std::uint64_t schedule_wakeup(AgentId target, SimTime at, std::int64_t tag = 0);

  void send(Message msg);
  void send(Message msg, SimTime latency);

  KernelSummary run(SimTime horizon);

  SimTime now() const { return now_; }
  bool started() const { return started_; }
  std::size_t pending() const { return queue_.size(); }

  void set_event_recorder(std::function<void(const EventRecord&)> recorder) {
    recorder_ = std::move(recorder);
  }

 private:
  void check_recipient(AgentId id) const;

  KernelConfig config_;
  std::vector<std::shared_ptr<Agent>> agents_;
  std::map<std::pair<AgentId, AgentId>, SimTime> latency_overrides_;
  std::vector<Event> queue_;  // binary heap
  std::uint64_t next_seq_ = 0;
  SimTime now_ = 0;
  bool started_ = false;
  bool in_handler_ = false;
  AgentId current_agent_ = 0;
  std::function<void(const EventRecord&)> recorder_;
};

// Writes one JSON object per processed event.
std::function<void(const EventRecord&)> jsonl_event_writer(std::ostream& out);

}  // namespace regimesim
