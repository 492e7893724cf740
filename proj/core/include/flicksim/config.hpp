#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "flicksim/chaos.hpp"
#include "flicksim/engine.hpp"
#include "flicksim/model.hpp"
#include "flicksim/users.hpp"

namespace flicksim {

// All validation failures for one load, reported together.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

// Complete, seedable description of a run. Loaded from JSON; unknown keys
// are rejected so a typo cannot silently fall back to a default.
struct ScenarioConfig {
  std::uint64_t seed = 1;
  std::size_t n_users = 2000;
  int n_days = 30;
  double base_rate = 0.5;
  int day_length = kMinutesPerDay;
  double speed = 0.0;  // wall ms per simulated minute; 0 = unthrottled

  SelectionParams selection;
  WatchParams watch;

  double feedback_eta = 0.05;
  int feedback_cadence_days = 1;

  FitParams fit;
  DemographicsParams demographics;
  double new_user_noise = 0.05;

  std::string ratings_path;
  std::string movies_path;
  RatingScale scale;

  std::vector<RecRoute> recommenders;
  std::uint64_t route_salt = 0;
  int rec_deadline_ms = 800;

  ChaosSchedule chaos;

  std::string log_dir;        // empty = in-memory
  bool log_flush = false;
  std::string checkpoint;     // optional model checkpoint to load

  int gateway_port = 0;       // 0 = gateway off
  std::string operator_token = "changeme";

  bool operator==(const ScenarioConfig&) const = default;

  EngineConfig engine_config() const;

  // effective config, defaults made explicit; reloads to an equal config
  nlohmann::ordered_json to_json() const;
};

// Strict load: rejects unknown keys and reports every constraint violation.
// Environment overrides applied after parse: FLICKSIM_GATEWAY_PORT,
// FLICKSIM_LOG_DIR.
ScenarioConfig load_config(const std::string& path);
ScenarioConfig config_from_json(const nlohmann::json& j);

// named presets: "desk" (2,000 users, 30 days, unthrottled) and
// "paper" (160,000 users, real-time throttle)
ScenarioConfig preset_config(const std::string& name);

ChaosEntry chaos_entry_from_json(const nlohmann::json& j);
nlohmann::ordered_json chaos_entry_to_json(const ChaosEntry& e);

}  // namespace flicksim
