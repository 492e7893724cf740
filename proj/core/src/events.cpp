#include "flicksim/events.hpp"

#include <charconv>

#include <json.hpp>

namespace flicksim {

namespace {

bool parse_int(std::string_view s, int& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

// ids on the v1 wire may not contain the grammar's delimiters
bool valid_id(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '=' || c == '/' || c == '\n') return false;
  }
  return true;
}

std::string serialize_v1(const Event& e) {
  if (const auto* w = std::get_if<WatchEvent>(&e)) {
    return sim_time_to_iso(w->ts) + "," + w->user_id + ",GET /data/m/" +
           w->movie_id + "/" + std::to_string(w->minute) + ".mpg";
  }
  if (const auto* r = std::get_if<RateEvent>(&e)) {
    return sim_time_to_iso(r->ts) + "," + r->user_id + ",GET /rate/" +
           r->movie_id + "=" + std::to_string(r->rating);
  }
  const auto& l = std::get<RecLogEvent>(e);
  std::string out = sim_time_to_iso(l.ts) + "," + l.user_id +
                    ",recommendation request " + l.server_node + ", status " +
                    std::to_string(l.status_code) + ", result: ";
  for (const auto& id : l.result) out += id + ", ";
  out += std::to_string(l.latency_ms) + " ms";
  return out;
}

std::optional<Event> parse_v1(const std::string& line) {
  auto c1 = line.find(',');
  if (c1 == std::string::npos) return std::nullopt;
  auto c2 = line.find(',', c1 + 1);
  if (c2 == std::string::npos) return std::nullopt;
  auto ts = iso_to_sim_time(line.substr(0, c1));
  if (!ts) return std::nullopt;
  std::string user = line.substr(c1 + 1, c2 - c1 - 1);
  if (!valid_id(user)) return std::nullopt;
  std::string_view rest{line.data() + c2 + 1, line.size() - c2 - 1};

  constexpr std::string_view kWatch = "GET /data/m/";
  constexpr std::string_view kRate = "GET /rate/";
  constexpr std::string_view kRec = "recommendation request ";

  if (rest.starts_with(kWatch)) {
    std::string_view tail = rest.substr(kWatch.size());
    if (!tail.ends_with(".mpg")) return std::nullopt;
    tail.remove_suffix(4);
    auto slash = tail.rfind('/');
    if (slash == std::string_view::npos) return std::nullopt;
    WatchEvent w;
    w.ts = *ts;
    w.user_id = std::move(user);
    w.movie_id = std::string(tail.substr(0, slash));
    if (!valid_id(w.movie_id)) return std::nullopt;
    if (!parse_int(tail.substr(slash + 1), w.minute) || w.minute < 1) {
      return std::nullopt;
    }
    return Event{std::move(w)};
  }
  if (rest.starts_with(kRate)) {
    std::string_view tail = rest.substr(kRate.size());
    auto eq = tail.rfind('=');
    if (eq == std::string_view::npos) return std::nullopt;
    RateEvent r;
    r.ts = *ts;
    r.user_id = std::move(user);
    r.movie_id = std::string(tail.substr(0, eq));
    if (!valid_id(r.movie_id)) return std::nullopt;
    if (!parse_int(tail.substr(eq + 1), r.rating) || r.rating < 1 ||
        r.rating > 5) {
      return std::nullopt;
    }
    return Event{std::move(r)};
  }
  if (rest.starts_with(kRec)) {
    std::string_view tail = rest.substr(kRec.size());
    constexpr std::string_view kStatus = ", status ";
    constexpr std::string_view kResult = ", result: ";
    auto sp = tail.find(kStatus);
    if (sp == std::string_view::npos) return std::nullopt;
    RecLogEvent l;
    l.ts = *ts;
    l.user_id = std::move(user);
    l.server_node = std::string(tail.substr(0, sp));
    tail = tail.substr(sp + kStatus.size());
    auto rp = tail.find(kResult);
    if (rp == std::string_view::npos) return std::nullopt;
    if (!parse_int(tail.substr(0, rp), l.status_code)) return std::nullopt;
    tail = tail.substr(rp + kResult.size());
    // comma-separated ids, then "<latency> ms"
    while (true) {
      auto comma = tail.find(", ");
      std::string_view tok =
          comma == std::string_view::npos ? tail : tail.substr(0, comma);
      if (comma == std::string_view::npos) {
        if (!tok.ends_with(" ms")) return std::nullopt;
        tok.remove_suffix(3);
        if (!parse_int(tok, l.latency_ms) || l.latency_ms < 0) {
          return std::nullopt;
        }
        break;
      }
      if (!valid_id(tok)) return std::nullopt;
      l.result.emplace_back(tok);
      tail = tail.substr(comma + 2);
    }
    return Event{std::move(l)};
  }
  return std::nullopt;
}

std::string serialize_v2(const Event& e) {
  nlohmann::ordered_json j;
  if (const auto* w = std::get_if<WatchEvent>(&e)) {
    j["ts"] = sim_time_to_iso(w->ts);
    j["user_id"] = w->user_id;
    j["movie_id"] = w->movie_id;
    j["minute"] = w->minute;
  } else if (const auto* r = std::get_if<RateEvent>(&e)) {
    j["ts"] = sim_time_to_iso(r->ts);
    j["user_id"] = r->user_id;
    j["movie_id"] = r->movie_id;
    j["rating"] = r->rating;
  } else {
    const auto& l = std::get<RecLogEvent>(e);
    j["ts"] = sim_time_to_iso(l.ts);
    j["user_id"] = l.user_id;
    j["server_node"] = l.server_node;
    j["status"] = l.status_code;
    j["result"] = l.result;
    j["latency_ms"] = l.latency_ms;
  }
  return j.dump();
}

bool keys_exactly(const nlohmann::json& j,
                  std::initializer_list<const char*> keys) {
  if (j.size() != keys.size()) return false;
  for (auto k : keys) {
    if (!j.contains(k)) return false;
  }
  return true;
}

std::optional<Event> parse_v2(const std::string& line) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  // exact key sets only: a corrupted or foreign record must not half-parse
  const bool watch_shape = keys_exactly(j, {"ts", "user_id", "movie_id", "minute"});
  const bool rate_shape = keys_exactly(j, {"ts", "user_id", "movie_id", "rating"});
  const bool rec_shape = keys_exactly(
      j, {"ts", "user_id", "server_node", "status", "result", "latency_ms"});
  if (!watch_shape && !rate_shape && !rec_shape) return std::nullopt;
  if (!j.contains("ts") || !j.at("ts").is_string() || !j.contains("user_id") ||
      !j.at("user_id").is_string()) {
    return std::nullopt;
  }
  auto ts = iso_to_sim_time(j.at("ts").get<std::string>());
  if (!ts) return std::nullopt;
  try {
    if (j.contains("minute")) {
      WatchEvent w;
      w.ts = *ts;
      w.user_id = j.at("user_id").get<std::string>();
      w.movie_id = j.at("movie_id").get<std::string>();
      w.minute = j.at("minute").get<int>();
      if (w.minute < 1) return std::nullopt;
      return Event{std::move(w)};
    }
    if (j.contains("rating")) {
      RateEvent r;
      r.ts = *ts;
      r.user_id = j.at("user_id").get<std::string>();
      r.movie_id = j.at("movie_id").get<std::string>();
      r.rating = j.at("rating").get<int>();
      if (r.rating < 1 || r.rating > 5) return std::nullopt;
      return Event{std::move(r)};
    }
    if (j.contains("status")) {
      RecLogEvent l;
      l.ts = *ts;
      l.user_id = j.at("user_id").get<std::string>();
      l.server_node = j.at("server_node").get<std::string>();
      l.status_code = j.at("status").get<int>();
      l.result = j.at("result").get<std::vector<std::string>>();
      l.latency_ms = j.at("latency_ms").get<int>();
      if (l.latency_ms < 0) return std::nullopt;
      return Event{std::move(l)};
    }
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

SimTime event_ts(const Event& e) {
  return std::visit([](const auto& x) { return x.ts; }, e);
}

const std::string& event_user(const Event& e) {
  return std::visit([](const auto& x) -> const std::string& { return x.user_id; },
                    e);
}

std::string serialize_event(const Event& e, int format_version) {
  switch (format_version) {
    case kWireV1:
      return serialize_v1(e);
    case kWireV2:
      return serialize_v2(e);
    default:
      throw std::invalid_argument("serialize_event: unknown format version " +
                                  std::to_string(format_version));
  }
}

std::optional<Event> parse_event(const std::string& line, int format_version) {
  switch (format_version) {
    case kWireV1:
      return parse_v1(line);
    case kWireV2:
      return parse_v2(line);
    default:
      return std::nullopt;
  }
}

std::optional<Event> parse_event_any(const std::string& line) {
  if (!line.empty() && line.front() == '{') return parse_v2(line);
  return parse_v1(line);
}

}  // namespace flicksim
