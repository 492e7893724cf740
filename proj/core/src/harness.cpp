#include "flicksim/harness.hpp"

#include <stdexcept>

namespace flicksim {

RatingsCorpus load_corpus(const ScenarioConfig& config) {
  if (config.ratings_path.empty() || config.movies_path.empty()) {
    throw ConfigError({"corpus.ratings and corpus.movies are required"});
  }
  return ingest_corpus(config.ratings_path, config.movies_path, config.scale);
}

World build_world(const ScenarioConfig& config, const RatingsCorpus& corpus) {
  World world;
  if (!config.checkpoint.empty()) {
    world.model = GroundTruthModel::load(config.checkpoint);
  } else {
    FitParams fit = config.fit;
    fit.seed = config.seed;
    world.model = GroundTruthModel::fit(corpus, fit);
  }
  world.catalog = corpus.catalog;
  world.profiles =
      synthesize_users(config.n_users, corpus, config.demographics, config.seed);
  for (const auto& p : world.profiles) {
    Rng rng = substream(config.seed, "new-user", hash_str(p.user_id));
    world.model.add_user(p.user_id, config.new_user_noise, rng);
  }
  return world;
}

Scenario::Scenario(ScenarioConfig config, bool test_profile)
    : config_(std::move(config)), test_profile_(test_profile) {
  corpus_ = load_corpus(config_);
  world_ = build_world(config_, corpus_);
  log_ = std::make_unique<EventLog>(config_.log_dir, config_.log_flush);
  client_ = std::make_unique<RecClient>(&world_.catalog, config_.rec_deadline_ms);

  for (const auto& route : config_.recommenders) {
    if (route.endpoint.rfind("builtin:", 0) != 0) continue;
    if (builtins_.count(route.endpoint)) continue;
    std::string spec = route.endpoint.substr(8);
    ScriptedRecommender::Options opts;
    opts.seed = substream(config_.seed, "builtin-stub").next_u64();
    opts.test_profile = test_profile_;
    auto colon = spec.find(':');
    std::string mode = colon == std::string::npos ? spec : spec.substr(0, colon);
    if (mode == "random") {
      opts.mode = ScriptedRecommender::Mode::random;
    } else if (mode == "constant_genre") {
      if (colon == std::string::npos) {
        throw ConfigError({"builtin:constant_genre needs a genre suffix"});
      }
      opts.mode = ScriptedRecommender::Mode::constant_genre;
      opts.genre = spec.substr(colon + 1);
    } else if (mode == "echo_popular") {
      opts.mode = ScriptedRecommender::Mode::echo_popular;
    } else if (mode == "oracle_leak") {
      opts.mode = ScriptedRecommender::Mode::oracle_leak;
    } else {
      throw ConfigError({"unknown builtin recommender: " + route.endpoint});
    }
    builtins_.emplace(route.endpoint,
                      std::make_unique<ScriptedRecommender>(
                          opts, corpus_,
                          opts.mode == ScriptedRecommender::Mode::oracle_leak
                              ? &world_.model
                              : nullptr));
  }
  if (!builtins_.empty()) {
    client_->set_builtin_handler(
        [this](const std::string& endpoint, const std::string& user_id) {
          return builtin_respond(endpoint, user_id);
        });
  }

  engine_ = std::make_unique<Engine>(config_.engine_config(), world_, *log_,
                                     *client_);
}

std::optional<std::string> Scenario::builtin_respond(
    const std::string& endpoint, const std::string& user_id) {
  auto it = builtins_.find(endpoint);
  if (it == builtins_.end()) return std::nullopt;
  return it->second->respond(user_id);
}

RunSummary Scenario::run() {
  std::unique_ptr<Gateway> gateway;
  if (config_.gateway_port > 0) {
    Gateway::Options opts;
    opts.operator_token = config_.operator_token;
    gateway = std::make_unique<Gateway>(world_, *log_, engine_.get(),
                                        &engine_->audit_log(), opts);
    if (!gateway->start(config_.gateway_port)) {
      throw std::runtime_error("gateway: port " +
                               std::to_string(config_.gateway_port) +
                               " unavailable");
    }
  }
  RunSummary summary = engine_->run();
  if (gateway) gateway->stop();
  return summary;
}

}  // namespace flicksim
