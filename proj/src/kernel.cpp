#include "regimesim/kernel.hpp"

#include <algorithm>
#include <ostream>

#include "regimesim/random.hpp"

namespace regimesim {

std::string_view to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::NewOrder: return "NewOrder";
    case MessageKind::CancelOrder: return "CancelOrder";
    case MessageKind::OrderAck: return "OrderAck";
    case MessageKind::Fill: return "Fill";
    case MessageKind::MarketDataRequest: return "MarketDataRequest";
    case MessageKind::MarketDataSnapshot: return "MarketDataSnapshot";
    case MessageKind::OracleQuery: return "OracleQuery";
    case MessageKind::OracleReply: return "OracleReply";
  }
  return "Unknown";
}

namespace {

struct Later {
  bool operator()(const Event& a, const Event& b) const {
    if (a.fire_at != b.fire_at) return a.fire_at > b.fire_at;
    return a.seq > b.seq;
  }
};

std::string_view payload_kind(const std::variant<WakeUp, Message>& payload) {
  if (std::holds_alternative<WakeUp>(payload)) return "WakeUp";
  return to_string(std::get<Message>(payload).kind());
}

}  // namespace

Kernel::Kernel(KernelConfig config) : config_(config) {}

AgentId Kernel::register_agent(std::shared_ptr<Agent> agent) {
  if (!agent) throw std::invalid_argument("cannot register a null agent");
  if (started_) throw std::logic_error("agents must be registered before the kernel runs");
  if (std::find(agents_.begin(), agents_.end(), agent) != agents_.end()) {
    throw std::invalid_argument("agent already registered");
  }
  agent->id_ = static_cast<AgentId>(agents_.size());
  agents_.push_back(std::move(agent));
  return agents_.back()->id_;
}

Agent& Kernel::agent(AgentId id) {
  check_recipient(id);
  return *agents_[id];
}

std::uint64_t Kernel::agent_seed(AgentId id) const {
  return derive_seed(config_.seed, Stream::Agent, id);
}

void Kernel::set_latency(AgentId from, AgentId to, SimTime latency) {
  if (latency < 0) throw std::invalid_argument("latency must be non-negative");
  latency_overrides_[{from, to}] = latency;
}

SimTime Kernel::latency(AgentId from, AgentId to) const {
  const auto found = latency_overrides_.find({from, to});
  return found == latency_overrides_.end() ? config_.default_latency : found->second;
}

void Kernel::check_recipient(AgentId id) const {
  if (id >= agents_.size()) {
    throw std::out_of_range("unknown agent id " + std::to_string(id));
  }
}

std::uint64_t Kernel::schedule(SimTime fire_at, AgentId target,
                               std::variant<WakeUp, Message> payload) {
  check_recipient(target);
  if (fire_at < now_) {
    throw std::invalid_argument("cannot schedule an event at " + std::to_string(fire_at) +
                                " before the current time " + std::to_string(now_));
  }
  const std::uint64_t seq = next_seq_++;
  queue_.push_back(Event{fire_at, seq, target, std::move(payload)});
  std::push_heap(queue_.begin(), queue_.end(), Later{});
  return seq;
}

std::uint64_t Kernel::schedule_wakeup(AgentId target, SimTime at, std::int64_t tag) {
  return schedule(at, target, WakeUp{tag});
}

void Kernel::send(Message msg) {
  const SimTime lat = latency(msg.sender, msg.recipient);
  send(std::move(msg), lat);
}

void Kernel::send(Message msg, SimTime latency) {
  if (latency < 0) throw std::invalid_argument("latency must be non-negative");
  check_recipient(msg.recipient);
  if (in_handler_ && msg.sender != current_agent_) {
    throw std::logic_error("agent " + std::to_string(current_agent_) +
                           " cannot send on behalf of agent " + std::to_string(msg.sender));
  }
  const AgentId target = msg.recipient;
  schedule(now_ + latency, target, std::move(msg));
}

KernelSummary Kernel::run(SimTime horizon) {
  if (started_) throw std::logic_error("kernel can only run once");
  started_ = true;
  KernelSummary summary;

  for (const auto& agent : agents_) {
    in_handler_ = true;
    current_agent_ = agent->id();
    agent->on_start(*this);
    in_handler_ = false;
  }

  while (!queue_.empty()) {
    if (queue_.front().fire_at > horizon) break;
    std::pop_heap(queue_.begin(), queue_.end(), Later{});
    Event event = std::move(queue_.back());
    queue_.pop_back();

    now_ = event.fire_at;
    ++summary.events_processed;
    summary.final_time = now_;
    const std::string_view kind = payload_kind(event.payload);
    if (recorder_) recorder_(EventRecord{event.fire_at, event.seq, event.target, kind});

    Agent& target = *agents_[event.target];
    in_handler_ = true;
    current_agent_ = event.target;
    try {
      if (auto* wake = std::get_if<WakeUp>(&event.payload)) {
        target.on_wakeup(*this, *wake);
      } else {
        target.on_message(*this, std::get<Message>(event.payload));
      }
    } catch (const std::exception& e) {
      in_handler_ = false;
      throw KernelError("event seq=" + std::to_string(event.seq) + " t=" +
                        std::to_string(event.fire_at) + " target=" +
                        std::to_string(event.target) + " kind=" + std::string(kind) + ": " +
                        e.what());
    }
    in_handler_ = false;
  }
  return summary;
}

std::function<void(const EventRecord&)> jsonl_event_writer(std::ostream& out) {
  return [&out](const EventRecord& r) {
    out << "{\"time_ns\":" << r.time << ",\"seq\":" << r.seq << ",\"target\":" << r.target
        << ",\"kind\":\"" << r.kind << "\"}\n";
  };
}

}  // namespace regimesim
