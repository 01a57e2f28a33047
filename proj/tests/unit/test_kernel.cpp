#include <gtest/gtest.h>

#include <sstream>

#include "regimesim/kernel.hpp"

using namespace regimesim;

namespace {

// Records everything it sees; optional scripted behaviour through callbacks.
class Probe : public Agent {
 public:
  std::function<void(Kernel&)> start;
  std::function<void(Kernel&, const WakeUp&)> wake;
  std::function<void(Kernel&, const Message&)> message;
  std::vector<std::pair<SimTime, std::int64_t>> wakes;
  std::vector<std::pair<SimTime, MessageKind>> messages;

  void on_start(Kernel& k) override {
    if (start) start(k);
  }
  void on_wakeup(Kernel& k, const WakeUp& w) override {
    wakes.emplace_back(k.now(), w.tag);
    if (wake) wake(k, w);
  }
  void on_message(Kernel& k, const Message& m) override {
    messages.emplace_back(k.now(), m.kind());
    if (message) message(k, m);
  }
};

}  // namespace

TEST(Kernel, EqualTimestampsResolveInInsertionOrder) {
  Kernel k;
  auto a = std::make_shared<Probe>();
  k.register_agent(a);
  k.schedule_wakeup(0, 100, 1);
  k.schedule_wakeup(0, 50, 2);
  k.schedule_wakeup(0, 100, 3);
  k.schedule_wakeup(0, 100, 4);
  k.run(1000);
  const std::vector<std::pair<SimTime, std::int64_t>> expected{{50, 2}, {100, 1}, {100, 3}, {100, 4}};
  EXPECT_EQ(a->wakes, expected);
}

TEST(Kernel, MessagesArriveAfterLatency) {
  Kernel k(KernelConfig{1, 250});
  auto a = std::make_shared<Probe>();
  auto b = std::make_shared<Probe>();
  const AgentId ia = k.register_agent(a);
  const AgentId ib = k.register_agent(b);
  k.set_latency(ia, ib, 1000);
  EXPECT_EQ(k.latency(ia, ib), 1000);
  EXPECT_EQ(k.latency(ib, ia), 250);
  a->start = [&](Kernel& kk) { kk.send(Message{ia, ib, OracleQueryMsg{}}); };
  b->message = [&](Kernel& kk, const Message& m) {
    kk.send(Message{ib, m.sender, OracleReplyMsg{}});
    kk.send(Message{ib, m.sender, OracleReplyMsg{}}, 0);
  };
  k.run(10'000);
  ASSERT_EQ(b->messages.size(), 1u);
  EXPECT_EQ(b->messages[0].first, 1000);
  ASSERT_EQ(a->messages.size(), 2u);
  // The zero-latency reply was scheduled later but fires first.
  EXPECT_EQ(a->messages[0].first, 1000);
  EXPECT_EQ(a->messages[1].first, 1250);
}

TEST(Kernel, StartsAgentsInRegistrationOrder) {
  Kernel k;
  std::vector<AgentId> order;
  for (int i = 0; i < 4; ++i) {
    auto p = std::make_shared<Probe>();
    p->start = [&order, raw = p.get()](Kernel&) { order.push_back(raw->id()); };
    k.register_agent(p);
  }
  const auto s = k.run(0);
  EXPECT_EQ(order, (std::vector<AgentId>{0, 1, 2, 3}));
  EXPECT_EQ(s.events_processed, 0u);
  EXPECT_EQ(s.final_time, 0);
}

TEST(Kernel, EventsPastHorizonAreNotProcessed) {
  Kernel k;
  auto a = std::make_shared<Probe>();
  k.register_agent(a);
  k.schedule_wakeup(0, 10);
  k.schedule_wakeup(0, 20);
  k.schedule_wakeup(0, 21);
  const auto s = k.run(20);
  EXPECT_EQ(a->wakes.size(), 2u);
  EXPECT_EQ(s.final_time, 20);
  EXPECT_EQ(s.events_processed, 2u);
}

TEST(Kernel, RejectsBadRegistrationAndScheduling) {
  Kernel k;
  EXPECT_THROW(k.register_agent(nullptr), std::invalid_argument);
  auto a = std::make_shared<Probe>();
  k.register_agent(a);
  EXPECT_THROW(k.register_agent(a), std::invalid_argument);
  EXPECT_THROW(k.schedule_wakeup(5, 0), std::out_of_range);
  EXPECT_THROW(k.set_latency(0, 0, -1), std::invalid_argument);
  a->wake = [](Kernel& kk, const WakeUp&) { kk.schedule_wakeup(0, kk.now() - 1); };
  k.schedule_wakeup(0, 10);
  EXPECT_THROW(k.run(100), KernelError);
  EXPECT_THROW(k.run(100), std::logic_error);
  EXPECT_THROW(k.register_agent(std::make_shared<Probe>()), std::logic_error);
}

TEST(Kernel, HandlerErrorsCarryEventContext) {
  Kernel k;
  auto a = std::make_shared<Probe>();
  k.register_agent(a);
  a->wake = [](Kernel&, const WakeUp&) { throw std::runtime_error("boom"); };
  k.schedule_wakeup(0, 77, 0);
  try {
    k.run(100);
    FAIL() << "expected KernelError";
  } catch (const KernelError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("t=77"), std::string::npos) << what;
    EXPECT_NE(what.find("kind=WakeUp"), std::string::npos) << what;
    EXPECT_NE(what.find("boom"), std::string::npos) << what;
  }
}

TEST(Kernel, SendingAsAnotherAgentIsRejected) {
  Kernel k;
  auto a = std::make_shared<Probe>();
  auto b = std::make_shared<Probe>();
  k.register_agent(a);
  k.register_agent(b);
  a->start = [](Kernel& kk) { kk.send(Message{1, 0, OracleQueryMsg{}}); };
  EXPECT_THROW(k.run(10), std::logic_error);
}

TEST(Kernel, AgentSeedsAreDistinctAndStable) {
  Kernel k1(KernelConfig{9, 1});
  Kernel k2(KernelConfig{9, 1});
  EXPECT_EQ(k1.agent_seed(3), k2.agent_seed(3));
  EXPECT_NE(k1.agent_seed(3), k1.agent_seed(4));
  Kernel k3(KernelConfig{10, 1});
  EXPECT_NE(k1.agent_seed(3), k3.agent_seed(3));
}

namespace {

std::string ping_pong_log(std::uint64_t seed) {
  std::ostringstream log;
  Kernel k(KernelConfig{seed, 3});
  auto a = std::make_shared<Probe>();
  auto b = std::make_shared<Probe>();
  const AgentId ia = k.register_agent(a);
  const AgentId ib = k.register_agent(b);
  k.set_event_recorder(jsonl_event_writer(log));
  Rng rng(k.agent_seed(ia));
  a->start = [&](Kernel& kk) { kk.schedule_wakeup(ia, 0); };
  a->wake = [&](Kernel& kk, const WakeUp&) {
    kk.send(Message{ia, ib, MarketDataRequestMsg{}});
    kk.schedule_wakeup(ia, kk.now() + 1 + static_cast<SimTime>(rng() % 50));
  };
  b->message = [&](Kernel& kk, const Message& m) {
    kk.send(Message{ib, m.sender, MarketDataSnapshotMsg{}});
  };
  k.run(2000);
  return log.str();
}

}  // namespace

TEST(Kernel, IdenticalSeedGivesIdenticalEventLog) {
  const auto first = ping_pong_log(5);
  EXPECT_EQ(first, ping_pong_log(5));
  EXPECT_NE(first, ping_pong_log(6));
  EXPECT_EQ(first.rfind("{\"time_ns\":0,\"seq\":0,\"target\":0,\"kind\":\"WakeUp\"}\n", 0), 0u);
}

TEST(Kernel, MessageKindNames) {
  EXPECT_EQ(to_string(MessageKind::NewOrder), "NewOrder");
  EXPECT_EQ(to_string(MessageKind::OracleReply), "OracleReply");
  Message m{0, 0, FillMsg{}};
  EXPECT_EQ(m.kind(), MessageKind::Fill);
}
