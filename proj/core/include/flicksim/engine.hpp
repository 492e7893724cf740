#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <optional>
#include <queue>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "flicksim/chaos.hpp"
#include "flicksim/corpus.hpp"
#include "flicksim/events.hpp"
#include "flicksim/log.hpp"
#include "flicksim/model.hpp"
#include "flicksim/rec_client.hpp"
#include "flicksim/rng.hpp"
#include "flicksim/sim_time.hpp"
#include "flicksim/users.hpp"

namespace flicksim {

struct SessionPlan {
  std::string user_id;
  SimTime start = 0;
};

struct SelectionParams {
  double sigma_select = 0.5;   // selection noise, rating units
  double bonus_rec = 0.5;      // added to recommended candidates
  int n_random = 20;           // random candidate count
  double sigma_rate = 0.25;    // rating noise
  double bonus_watched = 0.25; // added before rounding a revealed rating
  double p_rate = 0.5;         // probability a watch is followed by a rating
  bool operator==(const SelectionParams&) const = default;
};

struct WatchParams {
  double completion_steepness = 1.2;  // logistic slope in predicted rating
  double completion_midpoint = 3.0;   // rating at which completion odds are even
  bool operator==(const WatchParams&) const = default;
};

// Day schedule: per-user session count ~ Poisson(activity_level * base_rate),
// start times from a diurnal hourly weight profile. Deterministic per
// (seed, user, day); output ordered by (start, user order).
std::vector<SessionPlan> plan_day(std::span<const UserProfile> users, int day,
                                  double base_rate, std::uint64_t seed,
                                  int day_length = kMinutesPerDay);

struct Selection {
  std::string movie_id;
  bool was_recommended = false;
  std::size_t invalid_recommended = 0;  // ids excluded as unknown
};

// Candidate set = valid recommended ids + n_random uniform catalog samples
// (deduplicated; the recommended flag wins). argmax of
// predict + Normal(0, sigma_select) + bonus_rec * [recommended], stable
// tie-break by candidate order.
Selection select_movie(const std::string& user_id,
                       std::span<const std::string> recommended,
                       const SelectionParams& params,
                       const GroundTruthModel& model, const Catalog& catalog,
                       Rng& rng);

// Completion draw is logistic in the predicted rating; on success the full
// runtime is watched, otherwise a uniform partial prefix. One event per
// minute, timestamps one simulated minute apart starting at start + 1.
std::vector<WatchEvent> emit_watch_sequence(const std::string& user_id,
                                            const MovieRecord& movie,
                                            SimTime start,
                                            const GroundTruthModel& model,
                                            const WatchParams& params,
                                            Rng& rng);

// With probability p_rate: clamp(round-half-away-from-zero(
//   predict + Normal(0, sigma_rate) + bonus_watched), 1, 5).
std::optional<RateEvent> maybe_emit_rating(const std::string& user_id,
                                           const std::string& movie_id,
                                           SimTime ts,
                                           const SelectionParams& params,
                                           const GroundTruthModel& model,
                                           Rng& rng);

int round_half_away_from_zero(double x);

// Mutable world state the engine drives and the gateway reads.
struct World {
  GroundTruthModel model;
  Catalog catalog;
  std::vector<UserProfile> profiles;

  const UserProfile* find_profile(const std::string& user_id) const;
};

struct EngineConfig {
  std::uint64_t seed = 1;
  int n_days = 1;
  double base_rate = 0.5;       // expected sessions/user/day at activity 1
  int day_length = kMinutesPerDay;
  double speed = 0.0;           // wall ms per simulated minute; 0 = unthrottled
  SelectionParams selection;
  WatchParams watch;
  double feedback_eta = 0.05;
  int feedback_cadence_days = 1;
  std::vector<RecRoute> routes;  // empty = no recommendation requests
  std::uint64_t route_salt = 0;
  ChaosSchedule chaos;
  bool wait_for_start = false;  // hold in idle until a control `start`
};

struct RunSummary {
  std::uint64_t watch_events = 0;
  std::uint64_t rating_events = 0;
  std::uint64_t rec_requests = 0;
  std::uint64_t rec_successes = 0;
  std::uint64_t sessions = 0;
  std::uint64_t feedback_skipped = 0;
  int days_completed = 0;
  double wall_seconds = 0.0;
  double events_per_second = 0.0;

  std::string to_text() const;
};

// Topics fed by the engine: one combined topic plus per-kind topics.
inline constexpr const char* kTopicAll = "events";
inline constexpr const char* kTopicWatch = "watch";
inline constexpr const char* kTopicRate = "rate";
inline constexpr const char* kTopicRecLog = "reclog";

// Orchestrates the simulated days. Sessions are handled in simulated-time
// order through a stable min-queue; log appends happen in pop order so the
// emitted stream is globally non-decreasing in timestamp.
class Engine {
 public:
  enum class State { idle, running, paused, finished };

  Engine(EngineConfig config, World& world, EventLog& log, RecClient& client);

  RunSummary run();

  // control surface (used by the gateway); applied at the next safe boundary
  bool pause();
  bool resume();
  bool allow_start();  // releases the start gate; false if already started
  void request_stop();
  void inject_chaos(ChaosEntry entry);

  struct Status {
    State state = State::idle;
    int day = 0;
    SimTime sim_time = 0;
    std::uint64_t events_appended = 0;
    std::uint64_t rec_requests = 0;
  };
  Status status() const;

  const AuditLog& audit() const { return audit_; }
  AuditLog& audit_log() { return audit_; }

  // Held exclusively during day-boundary updates; the gateway takes shared
  // locks for metadata reads and times out to 503 past its deadline.
  std::shared_timed_mutex& world_mutex() { return world_mu_; }
  const ActiveEffects& active_effects() const { return effects_; }

 private:
  // queue payload: a session start (user id) or an already-built event
  struct QItem {
    SimTime ts = 0;
    std::uint64_t seq = 0;  // stable tie-break
    std::variant<std::string, Event> payload;
  };
  struct QItemAfter {
    bool operator()(const QItem& a, const QItem& b) const {
      if (a.ts != b.ts) return a.ts > b.ts;
      return a.seq > b.seq;
    }
  };

  void handle_session(const std::string& user_id, SimTime ts);
  void append_event(const Event& e);
  void throttle(SimTime ts);
  void checkpoint_pause();

  EngineConfig config_;
  World& world_;
  EventLog& log_;
  RecClient& client_;
  AuditLog audit_;

  ActiveEffects effects_;
  int wire_version_ = kWireV1;
  std::vector<std::pair<std::string, std::string>> day_watches_;
  RunSummary summary_;

  std::priority_queue<QItem, std::vector<QItem>, QItemAfter> pending_;
  std::uint64_t next_seq_ = 0;
  std::unordered_map<std::string, int> session_ordinal_;  // reset each day

  mutable std::mutex state_mu_;
  std::condition_variable state_cv_;
  State state_ = State::idle;
  bool start_released_ = false;
  std::atomic<bool> stop_requested_{false};
  std::atomic<int> current_day_{0};
  std::atomic<std::int64_t> sim_now_{0};
  std::atomic<std::uint64_t> events_appended_{0};
  std::atomic<std::uint64_t> rec_requests_{0};

  std::mutex injected_mu_;
  std::vector<ChaosEntry> injected_;

  std::shared_timed_mutex world_mu_;

  double wall_ms_debt_ = 0.0;
  SimTime last_throttle_ts_ = 0;
};

}  // namespace flicksim
