#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flicksim/corpus.hpp"
#include "flicksim/events.hpp"

namespace flicksim {

// A watch session reconstructed from the event stream: a run of watch-minute
// events for one (user, movie) starting at minute 1.
struct WatchSession {
  std::string user_id;
  std::string movie_id;
  SimTime start = 0;       // ts of the minute-1 event
  int last_minute = 0;
  bool attributed = false;
  std::optional<int> rating;  // rating revealed after this session, if any
};

inline constexpr SimTime kDefaultAttributionHorizon = 60;  // simulated minutes

// Reconstructs sessions and marks each one attributed iff its movie appeared
// in the user's most recent successful recommendation within `horizon`
// minutes before session start. Input must be timestamp-ordered; throws
// std::invalid_argument otherwise.
std::vector<WatchSession> attribute_watches(
    std::span<const Event> events,
    SimTime horizon = kDefaultAttributionHorizon);

struct MetricsWindow {
  SimTime start = 0;
  SimTime end = 0;

  // absent when the denominator is empty; never silently zero
  std::optional<double> rec_hit_rate;
  std::optional<double> avg_rating_recommended;
  std::optional<double> completion_rate;
  std::optional<double> request_success_rate;
  std::optional<double> genre_entropy;  // bits, fractional multi-genre credit

  std::map<std::string, double> genre_watch_share;

  std::uint64_t watches = 0;  // sessions starting in the window
  std::uint64_t attributed_watches = 0;
  std::uint64_t ratings = 0;
  std::uint64_t requests = 0;
  std::uint64_t successes = 0;

  std::string to_text() const;
};

// Window metrics over a timestamp-ordered event span. Events before the
// window still provide attribution context; only sessions starting inside
// [start, end) and requests inside the window are counted.
MetricsWindow compute_window(std::span<const Event> events, SimTime start,
                             SimTime end, const Catalog& catalog,
                             SimTime horizon = kDefaultAttributionHorizon);

struct TrendReport {
  double entropy_slope = 0.0;  // least-squares, bits per window
  bool entropy_declining = false;
  std::map<std::string, double> genre_share_slope;

  std::string to_text() const;
};

// Least-squares trends across a window series; flags a sustained entropy
// decline steeper than `decline_threshold` bits per window. Needs >= 3
// windows with defined entropy.
TrendReport feedback_indicator(std::span<const MetricsWindow> windows,
                               double decline_threshold = 0.01);

}  // namespace flicksim
