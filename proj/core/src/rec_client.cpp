#include "flicksim/rec_client.hpp"

#include <chrono>
#include <stdexcept>

#include <httplib.h>

#include "flicksim/rng.hpp"

namespace flicksim {

const std::string& canary_route(const std::string& user_id,
                                const std::vector<RecRoute>& routes,
                                std::uint64_t salt) {
  if (routes.empty()) throw std::invalid_argument("canary_route: no routes");
  double total = 0.0;
  for (const auto& r : routes) {
    if (r.weight < 0.0) throw std::invalid_argument("canary_route: negative weight");
    total += r.weight;
  }
  if (total <= 0.0) throw std::invalid_argument("canary_route: zero total weight");
  double x = (static_cast<double>(hash_combine(salt, hash_str(user_id)) >> 11) *
              0x1.0p-53) *
             total;
  double acc = 0.0;
  for (const auto& r : routes) {
    acc += r.weight;
    if (x < acc) return r.endpoint;
  }
  return routes.back().endpoint;
}

RecClient::RecClient(const Catalog* catalog, int deadline_ms,
                     std::size_t max_ids)
    : catalog_(catalog), deadline_ms_(deadline_ms), max_ids_(max_ids) {
  if (!catalog) throw std::invalid_argument("RecClient: null catalog");
  if (deadline_ms <= 0) throw std::invalid_argument("RecClient: deadline <= 0");
}

RecRequestOutcome RecClient::validate_body(const std::string& body, int status,
                                           int latency_ms) const {
  RecRequestOutcome out;
  out.status_code = status;
  out.latency_ms = latency_ms;
  if (status != 200) return out;
  std::size_t start = 0;
  while (start <= body.size() && out.result.size() < max_ids_) {
    auto comma = body.find(',', start);
    std::string id = body.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    // trim surrounding whitespace
    while (!id.empty() && (id.front() == ' ' || id.front() == '\n' ||
                           id.front() == '\r' || id.front() == '\t')) {
      id.erase(id.begin());
    }
    while (!id.empty() && (id.back() == ' ' || id.back() == '\n' ||
                           id.back() == '\r' || id.back() == '\t')) {
      id.pop_back();
    }
    if (!id.empty()) {
      ++out.raw_length;
      if (catalog_->find(id)) {
        out.result.push_back(std::move(id));
      } else {
        ++out.filtered_ids;
      }
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

RecRequestOutcome RecClient::request(const std::string& endpoint,
                                     const std::string& user_id) const {
  if (endpoint.rfind("builtin:", 0) == 0) {
    if (!builtin_) {
      throw std::logic_error("RecClient: builtin endpoint without handler: " +
                             endpoint);
    }
    auto body = builtin_(endpoint, user_id);
    if (!body) return validate_body("", 0, 0);
    return validate_body(*body, 200, 0);
  }

  auto t0 = std::chrono::steady_clock::now();
  httplib::Client cli(endpoint);
  cli.set_connection_timeout(0, deadline_ms_ * 1000);
  cli.set_read_timeout(0, deadline_ms_ * 1000);
  auto res = cli.Get("/recommend/" + user_id);
  auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                     std::chrono::steady_clock::now() - t0)
                     .count();
  int latency = static_cast<int>(elapsed);
  if (!res) {
    // transport failure or deadline; report at least the deadline on timeout
    return validate_body("", 0, latency);
  }
  return validate_body(res->body, res->status, latency);
}

}  // namespace flicksim
