#include "flicksim/config.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace flicksim {

namespace {

std::string join_errors(const std::vector<std::string>& errors) {
  std::ostringstream os;
  os << "invalid configuration (" << errors.size() << " problem"
     << (errors.size() == 1 ? "" : "s") << "):";
  for (const auto& e : errors) os << "\n  - " << e;
  return os.str();
}

using Errors = std::vector<std::string>;

void check_keys(const nlohmann::json& j,
                std::initializer_list<const char*> allowed,
                const std::string& ctx, Errors& errs) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) errs.push_back(ctx + ": unknown key '" + it.key() + "'");
  }
}

template <typename T>
void get_to(const nlohmann::json& j, const char* key, T& out,
            const std::string& ctx, Errors& errs) {
  if (!j.contains(key)) return;
  try {
    j.at(key).get_to(out);
  } catch (const nlohmann::json::exception& e) {
    errs.push_back(ctx + "." + key + ": " + e.what());
  }
}

void require_prob(double v, const char* name, Errors& errs) {
  if (!(v >= 0.0 && v <= 1.0)) {
    errs.push_back(std::string(name) + " must be in [0,1], got " +
                   std::to_string(v));
  }
}

void require_nonneg(double v, const char* name, Errors& errs) {
  if (!(v >= 0.0)) {
    errs.push_back(std::string(name) + " must be >= 0, got " +
                   std::to_string(v));
  }
}

unsigned corruption_kinds_from_json(const nlohmann::json& arr, Errors& errs) {
  unsigned mask = 0;
  for (const auto& k : arr) {
    std::string s = k.get<std::string>();
    if (s == "truncate") {
      mask |= static_cast<unsigned>(CorruptionKind::truncate);
    } else if (s == "garble_numeric") {
      mask |= static_cast<unsigned>(CorruptionKind::garble_numeric);
    } else if (s == "blank_field") {
      mask |= static_cast<unsigned>(CorruptionKind::blank_field);
    } else if (s == "unknown_user") {
      mask |= static_cast<unsigned>(CorruptionKind::unknown_user);
    } else {
      errs.push_back("chaos: unknown corruption kind '" + s + "'");
    }
  }
  return mask;
}

nlohmann::ordered_json corruption_kinds_to_json(unsigned mask) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  if (mask & static_cast<unsigned>(CorruptionKind::truncate)) arr.push_back("truncate");
  if (mask & static_cast<unsigned>(CorruptionKind::garble_numeric)) arr.push_back("garble_numeric");
  if (mask & static_cast<unsigned>(CorruptionKind::blank_field)) arr.push_back("blank_field");
  if (mask & static_cast<unsigned>(CorruptionKind::unknown_user)) arr.push_back("unknown_user");
  return arr;
}

ChaosEntry parse_chaos_entry(const nlohmann::json& j, Errors& errs) {
  ChaosEntry e;
  std::string ctx = "chaos entry";
  std::string kind;
  get_to(j, "kind", kind, ctx, errs);
  get_to(j, "at_day", e.at_day, ctx, errs);
  if (kind == "preference_drift") {
    e.kind = ChaosEntry::Kind::preference_drift;
    check_keys(j, {"kind", "at_day", "drift"}, ctx, errs);
    if (!j.contains("drift")) {
      errs.push_back(ctx + ": preference_drift needs 'drift'");
      return e;
    }
    const auto& d = j.at("drift");
    check_keys(d, {"kind", "target_genre", "rate_per_day", "start_day", "end_day"},
               ctx + ".drift", errs);
    std::string dk;
    get_to(d, "kind", dk, ctx, errs);
    if (dk == "genre_shift") {
      e.drift.kind = DriftSpec::Kind::genre_shift;
    } else if (dk == "population_shift") {
      e.drift.kind = DriftSpec::Kind::population_shift;
    } else {
      errs.push_back(ctx + ": unknown drift kind '" + dk + "'");
    }
    get_to(d, "target_genre", e.drift.target_genre, ctx, errs);
    get_to(d, "rate_per_day", e.drift.rate_per_day, ctx, errs);
    get_to(d, "start_day", e.drift.start_day, ctx, errs);
    get_to(d, "end_day", e.drift.end_day, ctx, errs);
    if (e.drift.start_day > e.drift.end_day) {
      errs.push_back(ctx + ": drift start_day > end_day");
    }
    if (!std::isfinite(e.drift.rate_per_day)) {
      errs.push_back(ctx + ": drift rate_per_day not finite");
    }
  } else if (kind == "schema_change") {
    e.kind = ChaosEntry::Kind::schema_change;
    check_keys(j, {"kind", "at_day", "format_version"}, ctx, errs);
    get_to(j, "format_version", e.format_version, ctx, errs);
    if (e.format_version != 1 && e.format_version != 2) {
      errs.push_back(ctx + ": format_version must be 1 or 2");
    }
  } else if (kind == "corrupt_events") {
    e.kind = ChaosEntry::Kind::corrupt_events;
    check_keys(j, {"kind", "at_day", "q", "corruption_kinds"}, ctx, errs);
    get_to(j, "q", e.events.q, ctx, errs);
    require_prob(e.events.q, "chaos.corrupt_events.q", errs);
    if (j.contains("corruption_kinds")) {
      e.events.kinds = corruption_kinds_from_json(j.at("corruption_kinds"), errs);
    }
  } else if (kind == "corrupt_metadata") {
    e.kind = ChaosEntry::Kind::corrupt_metadata;
    check_keys(j, {"kind", "at_day", "q", "field"}, ctx, errs);
    get_to(j, "q", e.metadata.q, ctx, errs);
    get_to(j, "field", e.metadata.field, ctx, errs);
    require_prob(e.metadata.q, "chaos.corrupt_metadata.q", errs);
  } else if (kind == "bias_demographics") {
    e.kind = ChaosEntry::Kind::bias_demographics;
    check_keys(j,
               {"kind", "at_day", "segment_age_min", "segment_age_max",
                "age_offset", "couple_population_shift", "shift_rate_per_day"},
               ctx, errs);
    get_to(j, "segment_age_min", e.bias.segment_age_min, ctx, errs);
    get_to(j, "segment_age_max", e.bias.segment_age_max, ctx, errs);
    get_to(j, "age_offset", e.bias.age_offset, ctx, errs);
    get_to(j, "couple_population_shift", e.bias.couple_population_shift, ctx, errs);
    get_to(j, "shift_rate_per_day", e.bias.shift_rate_per_day, ctx, errs);
  } else {
    errs.push_back(ctx + ": unknown kind '" + kind + "'");
  }
  return e;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

ChaosEntry chaos_entry_from_json(const nlohmann::json& j) {
  Errors errs;
  ChaosEntry e = parse_chaos_entry(j, errs);
  if (!errs.empty()) throw ConfigError(std::move(errs));
  return e;
}

nlohmann::ordered_json chaos_entry_to_json(const ChaosEntry& e) {
  nlohmann::ordered_json j;
  j["at_day"] = e.at_day;
  switch (e.kind) {
    case ChaosEntry::Kind::preference_drift:
      j["kind"] = "preference_drift";
      j["drift"] = {
          {"kind", e.drift.kind == DriftSpec::Kind::genre_shift
                       ? "genre_shift"
                       : "population_shift"},
          {"target_genre", e.drift.target_genre},
          {"rate_per_day", e.drift.rate_per_day},
          {"start_day", e.drift.start_day},
          {"end_day", e.drift.end_day}};
      break;
    case ChaosEntry::Kind::schema_change:
      j["kind"] = "schema_change";
      j["format_version"] = e.format_version;
      break;
    case ChaosEntry::Kind::corrupt_events:
      j["kind"] = "corrupt_events";
      j["q"] = e.events.q;
      j["corruption_kinds"] = corruption_kinds_to_json(e.events.kinds);
      break;
    case ChaosEntry::Kind::corrupt_metadata:
      j["kind"] = "corrupt_metadata";
      j["q"] = e.metadata.q;
      j["field"] = e.metadata.field;
      break;
    case ChaosEntry::Kind::bias_demographics:
      j["kind"] = "bias_demographics";
      j["segment_age_min"] = e.bias.segment_age_min;
      j["segment_age_max"] = e.bias.segment_age_max;
      j["age_offset"] = e.bias.age_offset;
      j["couple_population_shift"] = e.bias.couple_population_shift;
      j["shift_rate_per_day"] = e.bias.shift_rate_per_day;
      break;
  }
  return j;
}

ScenarioConfig config_from_json(const nlohmann::json& j) {
  Errors errs;
  ScenarioConfig c;
  const std::string ctx = "config";

  check_keys(j,
             {"seed", "n_users", "n_days", "base_rate", "day_length", "speed",
              "selection", "watch", "feedback", "fit", "demographics",
              "new_user_noise", "corpus", "recommenders", "chaos", "log",
              "checkpoint", "gateway"},
             ctx, errs);

  get_to(j, "seed", c.seed, ctx, errs);
  get_to(j, "n_users", c.n_users, ctx, errs);
  get_to(j, "n_days", c.n_days, ctx, errs);
  get_to(j, "base_rate", c.base_rate, ctx, errs);
  get_to(j, "day_length", c.day_length, ctx, errs);
  get_to(j, "speed", c.speed, ctx, errs);
  get_to(j, "new_user_noise", c.new_user_noise, ctx, errs);
  get_to(j, "checkpoint", c.checkpoint, ctx, errs);

  if (j.contains("selection")) {
    const auto& s = j.at("selection");
    check_keys(s,
               {"sigma_select", "bonus_rec", "n_random", "sigma_rate",
                "bonus_watched", "p_rate"},
               "selection", errs);
    get_to(s, "sigma_select", c.selection.sigma_select, "selection", errs);
    get_to(s, "bonus_rec", c.selection.bonus_rec, "selection", errs);
    get_to(s, "n_random", c.selection.n_random, "selection", errs);
    get_to(s, "sigma_rate", c.selection.sigma_rate, "selection", errs);
    get_to(s, "bonus_watched", c.selection.bonus_watched, "selection", errs);
    get_to(s, "p_rate", c.selection.p_rate, "selection", errs);
  }
  if (j.contains("watch")) {
    const auto& w = j.at("watch");
    check_keys(w, {"completion_steepness", "completion_midpoint"}, "watch", errs);
    get_to(w, "completion_steepness", c.watch.completion_steepness, "watch", errs);
    get_to(w, "completion_midpoint", c.watch.completion_midpoint, "watch", errs);
  }
  if (j.contains("feedback")) {
    const auto& f = j.at("feedback");
    check_keys(f, {"eta", "cadence_days"}, "feedback", errs);
    get_to(f, "eta", c.feedback_eta, "feedback", errs);
    get_to(f, "cadence_days", c.feedback_cadence_days, "feedback", errs);
  }
  if (j.contains("fit")) {
    const auto& f = j.at("fit");
    check_keys(f, {"k", "epochs", "reg", "learning_rate", "init_scale"}, "fit",
               errs);
    get_to(f, "k", c.fit.k, "fit", errs);
    get_to(f, "epochs", c.fit.epochs, "fit", errs);
    get_to(f, "reg", c.fit.reg, "fit", errs);
    get_to(f, "learning_rate", c.fit.learning_rate, "fit", errs);
    get_to(f, "init_scale", c.fit.init_scale, "fit", errs);
  }
  if (j.contains("demographics")) {
    const auto& d = j.at("demographics");
    check_keys(d,
               {"age_min", "age_max", "age_mean", "age_stddev", "activity_mean",
                "activity_sigma"},
               "demographics", errs);
    get_to(d, "age_min", c.demographics.age_min, "demographics", errs);
    get_to(d, "age_max", c.demographics.age_max, "demographics", errs);
    get_to(d, "age_mean", c.demographics.age_mean, "demographics", errs);
    get_to(d, "age_stddev", c.demographics.age_stddev, "demographics", errs);
    get_to(d, "activity_mean", c.demographics.activity_mean, "demographics", errs);
    get_to(d, "activity_sigma", c.demographics.activity_sigma, "demographics", errs);
  }
  if (j.contains("corpus")) {
    const auto& cp = j.at("corpus");
    check_keys(cp, {"ratings", "movies", "rating_lo", "rating_hi"}, "corpus",
               errs);
    get_to(cp, "ratings", c.ratings_path, "corpus", errs);
    get_to(cp, "movies", c.movies_path, "corpus", errs);
    get_to(cp, "rating_lo", c.scale.lo, "corpus", errs);
    get_to(cp, "rating_hi", c.scale.hi, "corpus", errs);
  }
  if (j.contains("recommenders")) {
    const auto& r = j.at("recommenders");
    check_keys(r, {"routes", "salt", "deadline_ms"}, "recommenders", errs);
    get_to(r, "salt", c.route_salt, "recommenders", errs);
    get_to(r, "deadline_ms", c.rec_deadline_ms, "recommenders", errs);
    if (r.contains("routes")) {
      for (const auto& rt : r.at("routes")) {
        check_keys(rt, {"endpoint", "weight"}, "recommenders.routes", errs);
        RecRoute route;
        get_to(rt, "endpoint", route.endpoint, "recommenders.routes", errs);
        get_to(rt, "weight", route.weight, "recommenders.routes", errs);
        c.recommenders.push_back(std::move(route));
      }
    }
  }
  if (j.contains("chaos")) {
    for (const auto& e : j.at("chaos")) {
      c.chaos.add(parse_chaos_entry(e, errs));
    }
  }
  if (j.contains("log")) {
    const auto& l = j.at("log");
    check_keys(l, {"dir", "flush"}, "log", errs);
    get_to(l, "dir", c.log_dir, "log", errs);
    get_to(l, "flush", c.log_flush, "log", errs);
  }
  if (j.contains("gateway")) {
    const auto& g = j.at("gateway");
    check_keys(g, {"port", "token"}, "gateway", errs);
    get_to(g, "port", c.gateway_port, "gateway", errs);
    get_to(g, "token", c.operator_token, "gateway", errs);
  }

  // constraints, reported exhaustively
  if (c.n_users < 1) errs.push_back("n_users must be >= 1");
  if (c.n_days < 1) errs.push_back("n_days must be >= 1");
  if (c.day_length < 1) errs.push_back("day_length must be >= 1");
  require_nonneg(c.base_rate, "base_rate", errs);
  require_nonneg(c.speed, "speed", errs);
  require_nonneg(c.selection.sigma_select, "selection.sigma_select", errs);
  require_nonneg(c.selection.sigma_rate, "selection.sigma_rate", errs);
  require_prob(c.selection.p_rate, "selection.p_rate", errs);
  if (c.selection.n_random < 1) errs.push_back("selection.n_random must be >= 1");
  require_prob(c.feedback_eta, "feedback.eta", errs);
  if (c.feedback_cadence_days < 1) errs.push_back("feedback.cadence_days must be >= 1");
  if (c.fit.k < 1) errs.push_back("fit.k must be >= 1");
  if (c.fit.epochs < 1) errs.push_back("fit.epochs must be >= 1");
  require_nonneg(c.fit.reg, "fit.reg", errs);
  require_nonneg(c.new_user_noise, "new_user_noise", errs);
  if (c.scale.lo >= c.scale.hi) errs.push_back("corpus.rating_lo must be < rating_hi");
  if (c.rec_deadline_ms <= 0) errs.push_back("recommenders.deadline_ms must be > 0");
  for (const auto& r : c.recommenders) {
    if (r.endpoint.empty()) errs.push_back("recommenders.routes: empty endpoint");
    if (r.weight < 0) errs.push_back("recommenders.routes: negative weight");
  }
  if (c.demographics.age_min < 0 || c.demographics.age_min > c.demographics.age_max) {
    errs.push_back("demographics: need 0 <= age_min <= age_max");
  }

  if (!errs.empty()) throw ConfigError(std::move(errs));
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open config file: " + path});
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError({"config is not valid JSON: " + path});
  ScenarioConfig c = config_from_json(j);

  if (const char* port = std::getenv("FLICKSIM_GATEWAY_PORT")) {
    c.gateway_port = std::atoi(port);
  }
  if (const char* dir = std::getenv("FLICKSIM_LOG_DIR")) {
    c.log_dir = dir;
  }

  Errors errs;
  if (!c.ratings_path.empty() && !std::filesystem::exists(c.ratings_path)) {
    errs.push_back("corpus.ratings: no such file: " + c.ratings_path);
  }
  if (!c.movies_path.empty() && !std::filesystem::exists(c.movies_path)) {
    errs.push_back("corpus.movies: no such file: " + c.movies_path);
  }
  if (!c.checkpoint.empty() && !std::filesystem::exists(c.checkpoint)) {
    errs.push_back("checkpoint: no such file: " + c.checkpoint);
  }
  if (!errs.empty()) throw ConfigError(std::move(errs));
  return c;
}

nlohmann::ordered_json ScenarioConfig::to_json() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["n_users"] = n_users;
  j["n_days"] = n_days;
  j["base_rate"] = base_rate;
  j["day_length"] = day_length;
  j["speed"] = speed;
  j["selection"] = {{"sigma_select", selection.sigma_select},
                    {"bonus_rec", selection.bonus_rec},
                    {"n_random", selection.n_random},
                    {"sigma_rate", selection.sigma_rate},
                    {"bonus_watched", selection.bonus_watched},
                    {"p_rate", selection.p_rate}};
  j["watch"] = {{"completion_steepness", watch.completion_steepness},
                {"completion_midpoint", watch.completion_midpoint}};
  j["feedback"] = {{"eta", feedback_eta}, {"cadence_days", feedback_cadence_days}};
  j["fit"] = {{"k", fit.k},
              {"epochs", fit.epochs},
              {"reg", fit.reg},
              {"learning_rate", fit.learning_rate},
              {"init_scale", fit.init_scale}};
  j["demographics"] = {{"age_min", demographics.age_min},
                       {"age_max", demographics.age_max},
                       {"age_mean", demographics.age_mean},
                       {"age_stddev", demographics.age_stddev},
                       {"activity_mean", demographics.activity_mean},
                       {"activity_sigma", demographics.activity_sigma}};
  j["new_user_noise"] = new_user_noise;
  j["corpus"] = {{"ratings", ratings_path},
                 {"movies", movies_path},
                 {"rating_lo", scale.lo},
                 {"rating_hi", scale.hi}};
  nlohmann::ordered_json routes = nlohmann::ordered_json::array();
  for (const auto& r : recommenders) {
    routes.push_back({{"endpoint", r.endpoint}, {"weight", r.weight}});
  }
  j["recommenders"] = {{"routes", routes},
                       {"salt", route_salt},
                       {"deadline_ms", rec_deadline_ms}};
  nlohmann::ordered_json chaos_arr = nlohmann::ordered_json::array();
  for (const auto& e : chaos.entries) chaos_arr.push_back(chaos_entry_to_json(e));
  j["chaos"] = chaos_arr;
  j["log"] = {{"dir", log_dir}, {"flush", log_flush}};
  j["checkpoint"] = checkpoint;
  j["gateway"] = {{"port", gateway_port}, {"token", operator_token}};
  return j;
}

EngineConfig ScenarioConfig::engine_config() const {
  EngineConfig e;
  e.seed = seed;
  e.n_days = n_days;
  e.base_rate = base_rate;
  e.day_length = day_length;
  e.speed = speed;
  e.selection = selection;
  e.watch = watch;
  e.feedback_eta = feedback_eta;
  e.feedback_cadence_days = feedback_cadence_days;
  e.routes = recommenders;
  e.route_salt = route_salt;
  e.chaos = chaos;
  return e;
}

ScenarioConfig preset_config(const std::string& name) {
  ScenarioConfig c;
  if (name == "desk") {
    c.n_users = 2000;
    c.n_days = 30;
    c.speed = 0.0;
  } else if (name == "paper") {
    // the reported production scale, throttled to real time
    c.n_users = 160000;
    c.n_days = 7;
    c.speed = 1000.0;  // one simulated minute per wall second
  } else {
    throw ConfigError({"unknown preset: " + name + " (expected desk|paper)"});
  }
  return c;
}

}  // namespace flicksim
