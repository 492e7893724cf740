#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "flicksim/model.hpp"
#include "flicksim/rng.hpp"
#include "flicksim/users.hpp"

namespace flicksim {

// Internal-only record of every injected corruption; sufficient to
// reconstruct the clean value. Never served through the gateway.
class AuditLog {
 public:
  struct Entry {
    int day = 0;
    std::string kind;
    std::string subject;   // user id, movie id, or topic
    std::string original;  // clean value
    std::string mutated;
  };

  void record(Entry e) {
    std::lock_guard lk(mu_);
    entries_.push_back(std::move(e));
  }
  std::vector<Entry> snapshot() const {
    std::lock_guard lk(mu_);
    return entries_;
  }
  std::size_t size() const {
    std::lock_guard lk(mu_);
    return entries_.size();
  }

 private:
  mutable std::mutex mu_;
  std::vector<Entry> entries_;
};

enum class CorruptionKind : unsigned {
  truncate = 1u << 0,
  garble_numeric = 1u << 1,
  blank_field = 1u << 2,
  unknown_user = 1u << 3,
  all = (1u << 4) - 1,
};

struct EventCorruption {
  double q = 0.0;  // per-line corruption probability
  unsigned kinds = static_cast<unsigned>(CorruptionKind::all);
  bool operator==(const EventCorruption&) const = default;
};

struct MetadataCorruption {
  double q = 0.0;
  std::string field;  // e.g. "runtime_minutes", "age"; empty = any
  bool operator==(const MetadataCorruption&) const = default;
};

struct BiasSpec {
  int segment_age_min = 0;  // selects users by true_age
  int segment_age_max = 0;
  int age_offset = 0;
  bool couple_population_shift = false;  // also pull the segment toward
                                         // R-rated content
  double shift_rate_per_day = 0.05;      // rate of that pull when coupled
  bool operator==(const BiasSpec&) const = default;
};

struct ChaosEntry {
  enum class Kind {
    preference_drift,
    schema_change,
    corrupt_events,
    corrupt_metadata,
    bias_demographics,
  };
  Kind kind = Kind::schema_change;
  int at_day = 0;
  DriftSpec drift;            // preference_drift
  int format_version = 1;     // schema_change
  EventCorruption events;     // corrupt_events
  MetadataCorruption metadata;  // corrupt_metadata
  BiasSpec bias;              // bias_demographics
  bool operator==(const ChaosEntry&) const = default;
};

struct ChaosSchedule {
  std::vector<ChaosEntry> entries;  // kept sorted by at_day
  void add(ChaosEntry e);
  bool operator==(const ChaosSchedule&) const = default;
};

struct ActiveEffects {
  int format_version = kWireFormatDefault;
  std::vector<DriftSpec> drifts;  // only those whose window covers `day`
  std::optional<EventCorruption> event_corruption;
  std::optional<MetadataCorruption> metadata_corruption;
  std::optional<BiasSpec> bias;

  static constexpr int kWireFormatDefault = 1;
};

// Pure: the effect set for a given day. Entries with at_day <= day apply;
// the latest schema change wins.
ActiveEffects activate(const ChaosSchedule& schedule, int day);

// With probability q mutates the line by one sampled corruption kind and
// records the original in the audit log (when given). Identity at q = 0.
std::string corrupt_event_line(const std::string& line,
                               const EventCorruption& spec, Rng& rng,
                               AuditLog* audit = nullptr, int day = 0);

// Shifts reported age by age_offset for every profile the segment predicate
// selects; true_age is never touched. Returns the number of affected users.
std::size_t bias_demographics(std::vector<UserProfile>& profiles,
                              const std::function<bool(const UserProfile&)>& segment,
                              int age_offset, AuditLog* audit = nullptr,
                              int day = 0);

}  // namespace flicksim
