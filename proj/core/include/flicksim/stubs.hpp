#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "flicksim/corpus.hpp"
#include "flicksim/model.hpp"

namespace httplib {
class Server;
}

namespace flicksim {

// Scripted reference recommenders. They satisfy the student-facing contract
// exactly (200, comma-separated ordered ids) and exist as fixtures for
// self-tests and grading baselines.
//
// oracle_leak serves the true top-k by predicted rating and must stay out of
// student-facing runs; constructing it requires an explicit test_profile
// token so a config typo cannot enable it.
class ScriptedRecommender {
 public:
  enum class Mode { random, constant_genre, echo_popular, oracle_leak };

  struct Options {
    Mode mode = Mode::random;
    std::uint64_t seed = 1;
    std::string genre;  // constant_genre
    int top_k = 20;
    bool test_profile = false;  // required for oracle_leak
  };

  ScriptedRecommender(Options opts, const RatingsCorpus& corpus,
                      const GroundTruthModel* model = nullptr);

  // Response body for GET /recommend/{user_id}. Deterministic per user for a
  // fixed seed, independent of call order.
  std::string respond(const std::string& user_id) const;

  Mode mode() const { return opts_.mode; }

 private:
  Options opts_;
  const GroundTruthModel* model_;
  std::vector<std::string> pool_;     // candidate ids for the mode
  std::vector<std::string> popular_;  // by corpus rating count, descending
};

// HTTP wrapper over a scripted recommender; start() spawns a server thread.
class StubServer {
 public:
  explicit StubServer(ScriptedRecommender rec);
  ~StubServer();
  StubServer(const StubServer&) = delete;
  StubServer& operator=(const StubServer&) = delete;

  bool start(int port);  // false if the port is taken
  void stop();
  int port() const { return port_; }

 private:
  ScriptedRecommender rec_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace flicksim
