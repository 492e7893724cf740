#include "flicksim/chaos.hpp"

#include <algorithm>
#include <stdexcept>

namespace flicksim {

void ChaosSchedule::add(ChaosEntry e) {
  auto pos = std::upper_bound(
      entries.begin(), entries.end(), e.at_day,
      [](int day, const ChaosEntry& x) { return day < x.at_day; });
  entries.insert(pos, std::move(e));
}

ActiveEffects activate(const ChaosSchedule& schedule, int day) {
  ActiveEffects fx;
  for (const auto& e : schedule.entries) {
    if (e.at_day > day) break;
    switch (e.kind) {
      case ChaosEntry::Kind::preference_drift:
        if (day >= e.drift.start_day && day <= e.drift.end_day) {
          fx.drifts.push_back(e.drift);
        }
        break;
      case ChaosEntry::Kind::schema_change:
        fx.format_version = e.format_version;  // latest wins
        break;
      case ChaosEntry::Kind::corrupt_events:
        fx.event_corruption = e.events;
        break;
      case ChaosEntry::Kind::corrupt_metadata:
        fx.metadata_corruption = e.metadata;
        break;
      case ChaosEntry::Kind::bias_demographics:
        fx.bias = e.bias;
        break;
    }
  }
  return fx;
}

namespace {

std::string apply_truncate(const std::string& line, Rng& rng) {
  if (line.size() <= 1) return "";
  return line.substr(0, rng.uniform_index(line.size()));
}

std::string apply_garble_numeric(const std::string& line, Rng& rng) {
  // pick a random digit occurrence and rewrite it
  std::vector<std::size_t> digits;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] >= '0' && line[i] <= '9') digits.push_back(i);
  }
  if (digits.empty()) return apply_truncate(line, rng);
  std::string out = line;
  std::size_t pos = digits[rng.uniform_index(digits.size())];
  char orig = out[pos];
  char repl;
  do {
    repl = static_cast<char>('0' + rng.uniform_index(10));
  } while (repl == orig);
  out[pos] = repl;
  return out;
}

std::string apply_blank_field(const std::string& line, Rng& rng) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  std::vector<std::size_t> nonempty;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (!fields[i].empty()) nonempty.push_back(i);
  }
  if (nonempty.empty()) return apply_truncate(line, rng);
  fields[nonempty[rng.uniform_index(nonempty.size())]].clear();
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += fields[i];
  }
  return out;
}

std::string apply_unknown_user(const std::string& line, Rng& rng) {
  auto c1 = line.find(',');
  if (c1 == std::string::npos) return apply_truncate(line, rng);
  auto c2 = line.find(',', c1 + 1);
  if (c2 == std::string::npos) return apply_truncate(line, rng);
  std::string ghost = "ghost_" + std::to_string(rng.uniform_index(1000000));
  return line.substr(0, c1 + 1) + ghost + line.substr(c2);
}

}  // namespace

std::string corrupt_event_line(const std::string& line,
                               const EventCorruption& spec, Rng& rng,
                               AuditLog* audit, int day) {
  if (spec.q < 0.0 || spec.q > 1.0) {
    throw std::invalid_argument("corrupt_event_line: q outside [0,1]");
  }
  if (!rng.bernoulli(spec.q)) return line;

  std::vector<CorruptionKind> enabled;
  for (CorruptionKind k : {CorruptionKind::truncate, CorruptionKind::garble_numeric,
                           CorruptionKind::blank_field, CorruptionKind::unknown_user}) {
    if (spec.kinds & static_cast<unsigned>(k)) enabled.push_back(k);
  }
  if (enabled.empty()) return line;

  CorruptionKind pick = enabled[rng.uniform_index(enabled.size())];
  std::string out;
  const char* kind_name = "";
  switch (pick) {
    case CorruptionKind::truncate:
      out = apply_truncate(line, rng);
      kind_name = "truncate";
      break;
    case CorruptionKind::garble_numeric:
      out = apply_garble_numeric(line, rng);
      kind_name = "garble_numeric";
      break;
    case CorruptionKind::blank_field:
      out = apply_blank_field(line, rng);
      kind_name = "blank_field";
      break;
    case CorruptionKind::unknown_user:
      out = apply_unknown_user(line, rng);
      kind_name = "unknown_user";
      break;
    default:
      return line;
  }
  if (audit) {
    audit->record({day, kind_name, "", line, out});
  }
  return out;
}

std::size_t bias_demographics(
    std::vector<UserProfile>& profiles,
    const std::function<bool(const UserProfile&)>& segment, int age_offset,
    AuditLog* audit, int day) {
  std::size_t affected = 0;
  for (auto& p : profiles) {
    if (!segment(p)) continue;
    int before = p.age;
    p.age = std::max(0, p.true_age + age_offset);
    ++affected;
    if (audit) {
      audit->record({day, "bias_demographics", p.user_id,
                     std::to_string(before), std::to_string(p.age)});
    }
  }
  if (affected == 0) {
    throw std::invalid_argument("bias_demographics: segment selects no users");
  }
  return affected;
}

}  // namespace flicksim
