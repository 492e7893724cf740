#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "flicksim/harness.hpp"
#include "flicksim/metrics.hpp"

namespace {

// exit codes: 0 ok, 2 config, 3 io, 4 runtime
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitRuntime = 4;

using namespace flicksim;

ScenarioConfig load_or_preset(const std::string& config_path,
                              const std::string& preset) {
  if (!config_path.empty()) return load_config(config_path);
  if (!preset.empty()) return preset_config(preset);
  return ScenarioConfig{};
}

int cmd_validate(const std::string& config_path) {
  try {
    ScenarioConfig c = load_config(config_path);
    std::cout << c.to_json().dump(2) << "\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  }
}

int cmd_fit(const std::string& config_path, const std::string& preset,
            const std::string& out_path) {
  ScenarioConfig c = load_or_preset(config_path, preset);
  RatingsCorpus corpus = load_corpus(c);
  std::cerr << "corpus: " << corpus.ratings.size() << " ratings, "
            << corpus.catalog.movies.size() << " movies, "
            << corpus.report.rejected << " rejected rows\n";
  FitParams fit = c.fit;
  fit.seed = c.seed;
  GroundTruthModel model = GroundTruthModel::fit(corpus, fit);
  std::cerr << "training RMSE: " << model.train_rmse() << "\n";
  model.save(out_path);
  std::cout << "checkpoint written: " << out_path << "\n";
  return 0;
}

int cmd_run(ScenarioConfig c, const std::string& out_dir) {
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    c.log_dir = out_dir;
  }
  // effective config, fully explicit
  std::cout << c.to_json().dump(2) << "\n";
  Scenario scenario(std::move(c));
  RunSummary summary = scenario.run();
  std::cout << summary.to_text();
  return 0;
}

int cmd_metrics(const std::string& log_path, int window_minutes,
                const std::string& movies_path, int horizon) {
  std::ifstream in(log_path);
  if (!in) {
    std::cerr << "cannot open log: " << log_path << "\n";
    return kExitIo;
  }
  Catalog catalog;
  if (!movies_path.empty()) {
    // reuse ingest for the catalog side; a synthetic single-rating file is
    // not needed because we only read movies here
    std::ifstream mf(movies_path);
    if (!mf) {
      std::cerr << "cannot open movies: " << movies_path << "\n";
      return kExitIo;
    }
    std::string line;
    bool header = true;
    while (std::getline(mf, line)) {
      if (header) {
        header = false;
        continue;
      }
      auto f = split_csv_line(line);
      if (f.size() < 3) continue;
      MovieRecord m;
      m.movie_id = f[0];
      m.title = f[1];
      std::string g;
      std::stringstream gs(f[2]);
      while (std::getline(gs, g, '|')) {
        if (!g.empty() && g != "(no genres listed)") m.genres.push_back(g);
      }
      catalog.add(std::move(m));
    }
  }

  std::vector<Event> events;
  std::string line;
  std::size_t unparsed = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (auto e = parse_event_any(line)) {
      events.push_back(std::move(*e));
    } else {
      ++unparsed;
    }
  }
  if (events.empty()) {
    std::cerr << "no parseable events in " << log_path << "\n";
    return kExitIo;
  }
  std::cerr << "parsed " << events.size() << " events, skipped " << unparsed
            << " unparseable lines\n";

  SimTime lo = event_ts(events.front());
  SimTime hi = event_ts(events.back()) + 1;
  std::vector<MetricsWindow> windows;
  for (SimTime start = lo; start < hi; start += window_minutes) {
    windows.push_back(compute_window(events, start, start + window_minutes,
                                     catalog, horizon));
    std::cout << windows.back().to_text() << "\n";
  }
  if (windows.size() >= 3) {
    std::cout << feedback_indicator(windows).to_text() << "\n";
  }
  return 0;
}

int cmd_stub(const std::string& mode, int port, const std::string& genre,
             const std::string& ratings, const std::string& movies,
             std::uint64_t seed, const std::string& model_path,
             bool test_profile) {
  RatingsCorpus corpus = ingest_corpus(ratings, movies);
  ScriptedRecommender::Options opts;
  opts.seed = seed;
  opts.genre = genre;
  opts.test_profile = test_profile;
  GroundTruthModel model;
  const GroundTruthModel* model_ptr = nullptr;
  if (mode == "random") {
    opts.mode = ScriptedRecommender::Mode::random;
  } else if (mode == "constant_genre") {
    opts.mode = ScriptedRecommender::Mode::constant_genre;
  } else if (mode == "echo_popular") {
    opts.mode = ScriptedRecommender::Mode::echo_popular;
  } else if (mode == "oracle_leak") {
    opts.mode = ScriptedRecommender::Mode::oracle_leak;
    if (model_path.empty()) {
      std::cerr << "oracle_leak requires --model\n";
      return kExitConfig;
    }
    model = GroundTruthModel::load(model_path);
    model_ptr = &model;
  } else {
    std::cerr << "unknown stub mode: " << mode << "\n";
    return kExitConfig;
  }
  StubServer server(ScriptedRecommender(opts, corpus, model_ptr));
  if (!server.start(port)) {
    std::cerr << "port in use: " << port << "\n";
    return kExitRuntime;
  }
  std::cout << "stub (" << mode << ") listening on :" << port << "\n";
  // serve until killed
  while (true) std::this_thread::sleep_for(std::chrono::seconds(3600));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flicksim: a simulated movie-streaming user population for "
               "evaluating recommendation services in production-like "
               "conditions"};
  app.require_subcommand(1);

  std::string config_path, preset, out_dir, out_ckpt = "model.ckpt.json";
  std::string log_path, movies_path, ratings_path, genre, mode = "random";
  std::string model_path;
  std::uint64_t seed_flag = 0;
  std::size_t users_flag = 0;
  int days_flag = 0, port = 8082, window_minutes = 1440, horizon = 60;
  double speed_flag = -1.0;
  bool test_profile = false;

  auto* validate = app.add_subcommand("validate", "check a config file and dump the effective config");
  validate->add_option("--config", config_path, "config file path")->required();

  auto* fit = app.add_subcommand("fit", "fit the ground-truth model and write a checkpoint");
  fit->add_option("--config", config_path, "config file path");
  fit->add_option("--preset", preset, "named preset (desk|paper)");
  fit->add_option("--out", out_ckpt, "checkpoint output path");

  auto* run = app.add_subcommand("run", "run a full simulation");
  run->add_option("--config", config_path, "config file path");
  run->add_option("--preset", preset, "named preset (desk|paper)");
  run->add_option("--seed", seed_flag, "override seed");
  run->add_option("--users", users_flag, "override n_users");
  run->add_option("--days", days_flag, "override n_days");
  run->add_option("--speed", speed_flag, "override speed (wall ms per simulated minute; 0 = unthrottled)");
  run->add_option("--out", out_dir, "write event log segments to this directory");
  run->add_option("--model", model_path, "use a fitted checkpoint instead of fitting");

  auto* metrics = app.add_subcommand("metrics", "batch telemetry report over an event log file");
  metrics->add_option("--log", log_path, "event log file (one event per line)")->required();
  metrics->add_option("--movies", movies_path, "movies catalog for genres/runtimes");
  metrics->add_option("--window", window_minutes, "window length in simulated minutes");
  metrics->add_option("--horizon", horizon, "attribution horizon in simulated minutes");

  auto* stub = app.add_subcommand("stub", "serve a scripted reference recommender");
  stub->add_option("--mode", mode, "random|constant_genre|echo_popular|oracle_leak");
  stub->add_option("--genre", genre, "genre for constant_genre");
  stub->add_option("--port", port, "listen port");
  stub->add_option("--ratings", ratings_path, "ratings csv")->required();
  stub->add_option("--movies", movies_path, "movies csv")->required();
  stub->add_option("--seed", seed_flag, "stub seed");
  stub->add_option("--model", model_path, "model checkpoint (oracle_leak)");
  stub->add_flag("--test-profile", test_profile, "enable test-only modes (oracle_leak)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) return cmd_validate(config_path);
    if (*fit) return cmd_fit(config_path, preset, out_ckpt);
    if (*run) {
      ScenarioConfig c = load_or_preset(config_path, preset);
      if (seed_flag) c.seed = seed_flag;
      if (users_flag) c.n_users = users_flag;
      if (days_flag) c.n_days = days_flag;
      if (speed_flag >= 0) c.speed = speed_flag;
      if (!model_path.empty()) c.checkpoint = model_path;
      return cmd_run(std::move(c), out_dir);
    }
    if (*metrics) return cmd_metrics(log_path, window_minutes, movies_path, horizon);
    if (*stub) {
      return cmd_stub(mode, port, genre, ratings_path, movies_path,
                      seed_flag ? seed_flag : 1, model_path, test_profile);
    }
  } catch (const flicksim::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  } catch (const std::ios_base::failure& e) {
    std::cerr << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
