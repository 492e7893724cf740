#include <doctest.h>

#include <string>
#include <vector>

#include "flicksim/chaos.hpp"
#include "flicksim/events.hpp"

using namespace flicksim;

namespace {

ChaosEntry drift_entry(int at_day, int start, int end) {
  ChaosEntry e;
  e.kind = ChaosEntry::Kind::preference_drift;
  e.at_day = at_day;
  e.drift.kind = DriftSpec::Kind::population_shift;
  e.drift.rate_per_day = 0.05;
  e.drift.start_day = start;
  e.drift.end_day = end;
  return e;
}

ChaosEntry schema_entry(int at_day, int version) {
  ChaosEntry e;
  e.kind = ChaosEntry::Kind::schema_change;
  e.at_day = at_day;
  e.format_version = version;
  return e;
}

std::vector<UserProfile> segment_profiles() {
  std::vector<UserProfile> out;
  for (int age : {15, 22, 34, 47, 61}) {
    UserProfile p;
    p.user_id = "u" + std::to_string(age);
    p.age = age;
    p.true_age = age;
    p.gender = "F";
    p.occupation = "other";
    out.push_back(p);
  }
  return out;
}

}  // namespace

TEST_CASE("schedule keeps entries sorted by activation day") {
  ChaosSchedule s;
  s.add(schema_entry(9, 2));
  s.add(schema_entry(3, 2));
  s.add(drift_entry(5, 5, 10));
  REQUIRE(s.entries.size() == 3);
  CHECK(s.entries[0].at_day == 3);
  CHECK(s.entries[1].at_day == 5);
  CHECK(s.entries[2].at_day == 9);
}

TEST_CASE("activate applies entries at and after their day") {
  ChaosSchedule s;
  s.add(schema_entry(3, 2));
  CHECK(activate(s, 0).format_version == 1);
  CHECK(activate(s, 2).format_version == 1);
  CHECK(activate(s, 3).format_version == 2);
  CHECK(activate(s, 30).format_version == 2);
}

TEST_CASE("latest schema change wins") {
  ChaosSchedule s;
  s.add(schema_entry(2, 2));
  s.add(schema_entry(6, 1));
  CHECK(activate(s, 4).format_version == 2);
  CHECK(activate(s, 6).format_version == 1);
}

TEST_CASE("drifts are active only within their window") {
  ChaosSchedule s;
  s.add(drift_entry(2, 2, 5));
  CHECK(activate(s, 1).drifts.empty());
  CHECK(activate(s, 2).drifts.size() == 1);
  CHECK(activate(s, 5).drifts.size() == 1);
  CHECK(activate(s, 6).drifts.empty());
}

TEST_CASE("corrupt_event_line is the identity at q = 0") {
  EventCorruption spec;
  spec.q = 0.0;
  Rng rng(1);
  std::string line = "2025-01-05T20:11:00,u42,GET /data/m/m1/13.mpg";
  CHECK(corrupt_event_line(line, spec, rng) == line);
}

TEST_CASE("corrupt_event_line mutates roughly q of the lines and audits each") {
  EventCorruption spec;
  spec.q = 0.3;
  AuditLog audit;
  std::string line = "2025-01-05T20:11:00,u42,GET /data/m/m1/13.mpg";
  int changed = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    Rng rng = substream(77, "corrupt-line", i);
    std::string out = corrupt_event_line(line, spec, rng, &audit, 4);
    if (out != line) ++changed;
  }
  CHECK(std::abs(changed / static_cast<double>(n) - 0.3) < 0.02);
  CHECK(audit.size() == static_cast<std::size_t>(changed));
  auto entries = audit.snapshot();
  REQUIRE(!entries.empty());
  CHECK(entries[0].original == line);
  CHECK(entries[0].mutated != line);
  CHECK(entries[0].day == 4);
}

TEST_CASE("each corruption kind yields a line the parser rejects or alters") {
  // Corrupted lines must never round-trip to the original event.
  std::string line = "2025-01-05T20:11:00,u42,GET /data/m/m1/13.mpg";
  Event original = *parse_event_any(line);
  for (unsigned kind :
       {static_cast<unsigned>(CorruptionKind::truncate),
        static_cast<unsigned>(CorruptionKind::garble_numeric),
        static_cast<unsigned>(CorruptionKind::blank_field),
        static_cast<unsigned>(CorruptionKind::unknown_user)}) {
    EventCorruption spec;
    spec.q = 1.0;
    spec.kinds = kind;
    for (int i = 0; i < 200; ++i) {
      Rng rng = substream(kind, "k", i);
      std::string out = corrupt_event_line(line, spec, rng);
      CAPTURE(kind);
      CAPTURE(out);
      REQUIRE(out != line);
      auto parsed = parse_event_any(out);
      if (parsed.has_value()) {
        // still-parseable corruption must describe a different event
        REQUIRE_FALSE(*parsed == original);
      }
    }
  }
}

TEST_CASE("bias_demographics shifts reported age only, inside the segment") {
  auto profiles = segment_profiles();
  AuditLog audit;
  std::size_t hit = bias_demographics(
      profiles,
      [](const UserProfile& p) { return p.true_age >= 20 && p.true_age <= 50; },
      -7, &audit, 12);
  CHECK(hit == 3);
  CHECK(audit.size() == 3);
  for (const auto& p : profiles) {
    if (p.true_age >= 20 && p.true_age <= 50) {
      CHECK(p.age == p.true_age - 7);
    } else {
      CHECK(p.age == p.true_age);
    }
    // true_age is immutable through any chaos path
    CHECK((p.true_age == 15 || p.true_age == 22 || p.true_age == 34 ||
           p.true_age == 47 || p.true_age == 61));
  }
}

TEST_CASE("bias_demographics clamps reported age at zero") {
  auto profiles = segment_profiles();
  bias_demographics(
      profiles, [](const UserProfile& p) { return p.true_age == 15; }, -40);
  CHECK(profiles[0].age == 0);
}

TEST_CASE("bias_demographics rejects an empty segment") {
  auto profiles = segment_profiles();
  CHECK_THROWS_AS(bias_demographics(
                      profiles, [](const UserProfile&) { return false; }, 5),
                  std::invalid_argument);
}
