#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "flicksim/corpus.hpp"

namespace flicksim {

struct RecRequestOutcome {
  int status_code = 0;  // 0 = transport failure / deadline exceeded
  int latency_ms = 0;
  std::vector<std::string> result;  // ordered, catalog-validated
  std::size_t filtered_ids = 0;     // ids dropped as unknown to the catalog
  std::size_t raw_length = 0;       // ids in the response before validation
};

struct RecRoute {
  std::string endpoint;
  double weight = 1.0;
  bool operator==(const RecRoute&) const = default;
};

// Deterministic per-user arm assignment: hash(user_id, salt) picks an
// endpoint proportionally to weight. Stable for the whole run.
const std::string& canary_route(const std::string& user_id,
                                const std::vector<RecRoute>& routes,
                                std::uint64_t salt = 0);

// Calls GET {endpoint}/recommend/{user_id} and validates the comma-separated
// id list against the catalog. Never throws for endpoint failures: timeouts
// and transport errors come back as status 0 with an empty result so the
// simulation keeps moving.
//
// Endpoints of the form "builtin:..." are dispatched to the local handler
// instead of HTTP; the handler returns the response body or nullopt for a
// simulated failure. Builtin latency is 0 by construction, which is what
// keeps replay byte-identical.
class RecClient {
 public:
  using BuiltinHandler = std::function<std::optional<std::string>(
      const std::string& endpoint, const std::string& user_id)>;

  RecClient(const Catalog* catalog, int deadline_ms = 800,
            std::size_t max_ids = 50);

  void set_builtin_handler(BuiltinHandler h) { builtin_ = std::move(h); }

  RecRequestOutcome request(const std::string& endpoint,
                            const std::string& user_id) const;

  int deadline_ms() const { return deadline_ms_; }

  // Parses and validates a response body; shared by the HTTP and builtin
  // paths and reused by tests.
  RecRequestOutcome validate_body(const std::string& body, int status,
                                  int latency_ms) const;

 private:
  const Catalog* catalog_;
  int deadline_ms_;
  std::size_t max_ids_;
  BuiltinHandler builtin_;
};

}  // namespace flicksim
