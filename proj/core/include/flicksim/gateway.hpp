#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <thread>

#include "flicksim/engine.hpp"
#include "flicksim/log.hpp"

namespace httplib {
class Server;
}

namespace flicksim {

// Student/operator network surface.
//   GET  /movie/{id}
//   GET  /user/{id}
//   GET  /events/{topic}?from={offset}&max={n}
//   POST /control            (operator token via X-Operator-Token)
// Metadata responses never carry latent factors, predicted ratings, or
// true_age; corruption under active chaos is applied at serving time and
// every divergence lands in the engine's audit log, so the catalog itself
// stays clean.
class Gateway {
 public:
  struct Options {
    std::string operator_token = "changeme";
    int long_poll_ms = 0;        // 0 = return immediately at end of log
    int quiesce_deadline_ms = 250;  // 503 if a day-boundary update holds longer
    std::size_t max_batch = 1000;
  };

  Gateway(World& world, EventLog& log, Engine* engine, AuditLog* audit,
          Options options);
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  bool start(int port);
  void stop();

 private:
  World& world_;
  EventLog& log_;
  Engine* engine_;  // may be null (metadata-only serving in tests)
  AuditLog* audit_;
  Options options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace flicksim
