#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace flicksim {

// Simulated time: whole minutes since 2025-01-01T00:00:00. Events carry
// minute granularity; the wire format prints seconds as ":00".
using SimTime = std::int64_t;

inline constexpr int kMinutesPerDay = 1440;

std::string sim_time_to_iso(SimTime minutes);
std::optional<SimTime> iso_to_sim_time(const std::string& iso);

inline SimTime day_start(int day, int day_length = kMinutesPerDay) {
  return static_cast<SimTime>(day) * day_length;
}

inline int day_of(SimTime t, int day_length = kMinutesPerDay) {
  return static_cast<int>(t / day_length);
}

}  // namespace flicksim
