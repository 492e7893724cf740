#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "flicksim/sim_time.hpp"

namespace flicksim {

struct WatchEvent {
  SimTime ts = 0;
  std::string user_id;
  std::string movie_id;
  int minute = 1;  // >= 1, <= runtime
  bool operator==(const WatchEvent&) const = default;
};

struct RateEvent {
  SimTime ts = 0;
  std::string user_id;
  std::string movie_id;
  int rating = 1;  // 1..5
  bool operator==(const RateEvent&) const = default;
};

struct RecLogEvent {
  SimTime ts = 0;
  std::string user_id;
  std::string server_node;
  int status_code = 0;  // 0 = transport failure / timeout
  std::vector<std::string> result;  // ordered, catalog-validated ids
  int latency_ms = 0;
  bool operator==(const RecLogEvent&) const = default;
};

using Event = std::variant<WatchEvent, RateEvent, RecLogEvent>;

SimTime event_ts(const Event& e);
const std::string& event_user(const Event& e);

// Wire formats. v1 mimics server-access-log lines:
//   TS,USER,GET /data/m/MOVIE/MIN.mpg
//   TS,USER,GET /rate/MOVIE=STARS
//   TS,USER,recommendation request NODE, status CODE, result: M1, ..., LAT ms
// v2 is one JSON object per line with named fields; field names and shape
// deliberately differ from v1 so a scheduled schema change breaks naive
// consumers.
inline constexpr int kWireV1 = 1;
inline constexpr int kWireV2 = 2;

std::string serialize_event(const Event& e, int format_version);
std::optional<Event> parse_event(const std::string& line, int format_version);

// Tries both versions; used by log consumers that span a schema change.
std::optional<Event> parse_event_any(const std::string& line);

}  // namespace flicksim
