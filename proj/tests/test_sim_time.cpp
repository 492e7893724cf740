#include <doctest.h>

#include "flicksim/sim_time.hpp"

using namespace flicksim;

TEST_CASE("epoch and known instants format correctly") {
  CHECK(sim_time_to_iso(0) == "2025-01-01T00:00:00");
  CHECK(sim_time_to_iso(1) == "2025-01-01T00:01:00");
  CHECK(sim_time_to_iso(kMinutesPerDay) == "2025-01-02T00:00:00");
  // 2025-01-05 is day 4; 20:11 is minute 1211 of the day.
  CHECK(sim_time_to_iso(4 * kMinutesPerDay + 20 * 60 + 11) ==
        "2025-01-05T20:11:00");
  // Month rollover, and February in a non-leap year.
  CHECK(sim_time_to_iso(31 * kMinutesPerDay) == "2025-02-01T00:00:00");
  CHECK(sim_time_to_iso((31 + 28) * kMinutesPerDay) == "2025-03-01T00:00:00");
}

TEST_CASE("parse inverts format") {
  for (SimTime t : {SimTime{0}, SimTime{1}, SimTime{1439}, SimTime{7211},
                    SimTime{400 * 1440 + 777}}) {
    auto back = iso_to_sim_time(sim_time_to_iso(t));
    REQUIRE(back.has_value());
    CHECK(*back == t);
  }
}

TEST_CASE("parse rejects malformed timestamps") {
  CHECK_FALSE(iso_to_sim_time("").has_value());
  CHECK_FALSE(iso_to_sim_time("2025-01-01").has_value());
  CHECK_FALSE(iso_to_sim_time("2025-01-01 00:00:00").has_value());
  CHECK_FALSE(iso_to_sim_time("2025-13-01T00:00:00").has_value());
  CHECK_FALSE(iso_to_sim_time("2025-01-32T00:00:00").has_value());
  CHECK_FALSE(iso_to_sim_time("2025-01-01T24:00:00").has_value());
  CHECK_FALSE(iso_to_sim_time("not a time").has_value());
}

TEST_CASE("day helpers") {
  CHECK(day_of(0) == 0);
  CHECK(day_of(1439) == 0);
  CHECK(day_of(1440) == 1);
  CHECK(day_start(3) == 3 * 1440);
  CHECK(day_of(day_start(17)) == 17);
}
