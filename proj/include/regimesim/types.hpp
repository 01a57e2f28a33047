#pragma once

#include <cstdint>
#include <string_view>

namespace regimesim {

// Nanoseconds since session open.
using SimTime = std::int64_t;
using AgentId = std::uint32_t;
using OrderId = std::uint64_t;
// Integer cents; tick size is one cent.
using Price = std::int64_t;
using Qty = std::int64_t;

inline constexpr SimTime kNanosPerSecond = 1'000'000'000;
inline constexpr SimTime kNanosPerMilli = 1'000'000;
inline constexpr SimTime kNanosPerMicro = 1'000;

constexpr SimTime seconds_to_nanos(double seconds) {
  return static_cast<SimTime>(seconds * static_cast<double>(kNanosPerSecond) +
                              (seconds >= 0 ? 0.5 : -0.5));
}

constexpr double nanos_to_seconds(SimTime t) {
  return static_cast<double>(t) / static_cast<double>(kNanosPerSecond);
}

enum class Side : std::uint8_t { Buy, Sell };

constexpr Side opposite(Side s) { return s == Side::Buy ? Side::Sell : Side::Buy; }

constexpr std::string_view to_string(Side s) { return s == Side::Buy ? "buy" : "sell"; }

}  // namespace regimesim
