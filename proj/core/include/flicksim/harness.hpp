#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "flicksim/config.hpp"
#include "flicksim/engine.hpp"
#include "flicksim/gateway.hpp"
#include "flicksim/log.hpp"
#include "flicksim/rec_client.hpp"
#include "flicksim/stubs.hpp"

namespace flicksim {

// Wires a full run from a ScenarioConfig: corpus ingest, ground-truth fit
// (or checkpoint load), user synthesis, event log, recommendation client,
// optional gateway, engine.
//
// Route endpoints of the form "builtin:MODE[:GENRE]" are served in-process
// by scripted recommenders (modes: random, constant_genre, echo_popular,
// oracle_leak). oracle_leak additionally requires constructing the scenario
// with test_profile = true; a config file alone can never enable it.
class Scenario {
 public:
  explicit Scenario(ScenarioConfig config, bool test_profile = false);

  // Runs the simulation to completion. The gateway (if configured) serves
  // for the duration of the call.
  RunSummary run();

  const ScenarioConfig& config() const { return config_; }
  const RatingsCorpus& corpus() const { return corpus_; }
  World& world() { return world_; }
  EventLog& log() { return *log_; }
  Engine& engine() { return *engine_; }

 private:
  std::optional<std::string> builtin_respond(const std::string& endpoint,
                                             const std::string& user_id);

  ScenarioConfig config_;
  bool test_profile_;
  RatingsCorpus corpus_;
  World world_;
  std::unique_ptr<EventLog> log_;
  std::unique_ptr<RecClient> client_;
  std::unique_ptr<Engine> engine_;
  std::map<std::string, std::unique_ptr<ScriptedRecommender>> builtins_;
};

// Corpus + model + profiles, shared by `fit` and Scenario.
RatingsCorpus load_corpus(const ScenarioConfig& config);
World build_world(const ScenarioConfig& config, const RatingsCorpus& corpus);

}  // namespace flicksim
