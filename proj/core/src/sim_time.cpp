#include "flicksim/sim_time.hpp"

#include <chrono>
#include <cstdio>

namespace flicksim {

namespace {
// days since civil epoch of the simulated epoch 2025-01-01
constexpr std::chrono::sys_days kEpoch =
    std::chrono::sys_days{std::chrono::year{2025} / 1 / 1};
}  // namespace

std::string sim_time_to_iso(SimTime minutes) {
  std::int64_t day = minutes >= 0 ? minutes / kMinutesPerDay
                                  : (minutes - kMinutesPerDay + 1) / kMinutesPerDay;
  int in_day = static_cast<int>(minutes - day * kMinutesPerDay);
  auto ymd = std::chrono::year_month_day{kEpoch + std::chrono::days{day}};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:00",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), in_day / 60, in_day % 60);
  return buf;
}

std::optional<SimTime> iso_to_sim_time(const std::string& iso) {
  int y, mo, d, h, mi, s;
  if (std::sscanf(iso.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d", &y, &mo, &d, &h, &mi,
                  &s) != 6) {
    return std::nullopt;
  }
  if (iso.size() != 19) return std::nullopt;
  // minute resolution: the grammar pins the seconds field to 00
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 ||
      mi > 59 || s != 0) {
    return std::nullopt;
  }
  auto ymd = std::chrono::year{y} / mo / d;
  if (!ymd.ok()) return std::nullopt;
  auto days = (std::chrono::sys_days{ymd} - kEpoch).count();
  return static_cast<SimTime>(days) * kMinutesPerDay + h * 60 + mi;
}

}  // namespace flicksim
