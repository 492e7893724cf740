#include "flicksim/gateway.hpp"

#include <atomic>
#include <optional>

#include <httplib.h>
#include <json.hpp>

#include "flicksim/config.hpp"
#include "flicksim/rng.hpp"

namespace flicksim {

namespace {

std::atomic<std::uint64_t> g_corruption_counter{0};

// serving-time perturbation of a numeric field; the clean value stays in the
// catalog and the divergence is recorded in the audit log
int perturb_value(int clean) {
  std::uint64_t h = hash_mix(g_corruption_counter.fetch_add(1) ^
                             0x9e3779b97f4a7c15ULL);
  int delta = 1 + static_cast<int>(h % 97);
  return (h >> 32) % 2 == 0 ? clean + delta : std::max(0, clean - delta);
}

}  // namespace

Gateway::Gateway(World& world, EventLog& log, Engine* engine, AuditLog* audit,
                 Options options)
    : world_(world),
      log_(log),
      engine_(engine),
      audit_(audit),
      options_(std::move(options)) {}

Gateway::~Gateway() { stop(); }

bool Gateway::start(int port) {
  server_ = std::make_unique<httplib::Server>();
  auto& s = *server_;

  // Shared read access with a deadline: 503 if a day-boundary update holds
  // the world lock longer than the quiesce budget.
  auto with_world_read = [this](auto&& fn, httplib::Response& res) {
    if (engine_) {
      auto& mu = engine_->world_mutex();
      if (!mu.try_lock_shared_for(
              std::chrono::milliseconds(options_.quiesce_deadline_ms))) {
        res.status = 503;
        res.set_content(R"({"error":"world update in progress"})",
                        "application/json");
        return;
      }
      std::shared_lock lk(mu, std::adopt_lock);
      fn();
    } else {
      fn();
    }
  };

  s.Get(R"(/movie/([^/]+))", [this, with_world_read](const httplib::Request& req,
                                                     httplib::Response& res) {
    with_world_read(
        [&] {
          const MovieRecord* m = world_.catalog.find(req.matches[1]);
          if (!m) {
            res.status = 404;
            res.set_content(R"({"error":"unknown movie"})", "application/json");
            return;
          }
          MovieRecord served = *m;
          const MetadataCorruption* mc = nullptr;
          if (engine_ && engine_->active_effects().metadata_corruption) {
            mc = &*engine_->active_effects().metadata_corruption;
          }
          if (mc && (mc->field.empty() || mc->field == "runtime_minutes" ||
                     mc->field == "release_year")) {
            std::uint64_t h = hash_mix(g_corruption_counter.load() ^
                                       hash_str(served.movie_id));
            if (static_cast<double>(h >> 11) * 0x1.0p-53 < mc->q) {
              std::string field =
                  mc->field.empty()
                      ? ((h & 1) ? "runtime_minutes" : "release_year")
                      : mc->field;
              int clean, dirty;
              if (field == "runtime_minutes") {
                clean = served.runtime_minutes;
                dirty = std::max(1, perturb_value(clean));
                served.runtime_minutes = dirty;
              } else {
                clean = served.release_year;
                dirty = perturb_value(clean);
                served.release_year = dirty;
              }
              if (audit_) {
                audit_->record({engine_ ? engine_->status().day : 0,
                                "corrupt_metadata:" + field, served.movie_id,
                                std::to_string(clean), std::to_string(dirty)});
              }
            }
          }
          nlohmann::ordered_json j;
          j["movie_id"] = served.movie_id;
          j["title"] = served.title;
          j["genres"] = served.genres;
          j["release_year"] = served.release_year;
          j["runtime_minutes"] = served.runtime_minutes;
          j["content_rating"] = served.content_rating;
          res.set_content(j.dump(), "application/json");
        },
        res);
  });

  s.Get(R"(/user/([^/]+))", [this, with_world_read](const httplib::Request& req,
                                                    httplib::Response& res) {
    with_world_read(
        [&] {
          const UserProfile* p = world_.find_profile(req.matches[1]);
          if (!p) {
            res.status = 404;
            res.set_content(R"({"error":"unknown user"})", "application/json");
            return;
          }
          int age = p->age;  // reported age; bias already folded in
          const MetadataCorruption* mc = nullptr;
          if (engine_ && engine_->active_effects().metadata_corruption) {
            mc = &*engine_->active_effects().metadata_corruption;
          }
          if (mc && mc->field == "age") {
            std::uint64_t h =
                hash_mix(g_corruption_counter.load() ^ hash_str(p->user_id));
            if (static_cast<double>(h >> 11) * 0x1.0p-53 < mc->q) {
              int dirty = perturb_value(age);
              if (audit_) {
                audit_->record({engine_ ? engine_->status().day : 0,
                                "corrupt_metadata:age", p->user_id,
                                std::to_string(age), std::to_string(dirty)});
              }
              age = dirty;
            }
          }
          // reported fields only: no latent factors, no true_age
          nlohmann::ordered_json j;
          j["user_id"] = p->user_id;
          j["age"] = age;
          j["gender"] = p->gender;
          j["occupation"] = p->occupation;
          res.set_content(j.dump(), "application/json");
        },
        res);
  });

  s.Get(R"(/events/([^/]+))", [this](const httplib::Request& req,
                                     httplib::Response& res) {
    const std::string topic = req.matches[1];
    std::int64_t from = 0;
    std::size_t max = options_.max_batch;
    if (req.has_param("from")) {
      try {
        from = std::stoll(req.get_param_value("from"));
      } catch (...) {
        from = -1;
      }
    }
    if (req.has_param("max")) {
      try {
        max = std::min<std::size_t>(options_.max_batch,
                                    std::stoull(req.get_param_value("max")));
      } catch (...) {
        res.status = 400;
        res.set_content(R"({"error":"bad max"})", "application/json");
        return;
      }
    }
    if (from < 0) {
      res.status = 400;
      res.set_content(R"({"error":"negative offset"})", "application/json");
      return;
    }
    if (!log_.has_topic(topic)) {
      res.status = 404;
      res.set_content(R"({"error":"unknown topic"})", "application/json");
      return;
    }
    auto deadline = std::chrono::steady_clock::now() +
                    std::chrono::milliseconds(options_.long_poll_ms);
    EventLog::ReadResult batch;
    while (true) {
      batch = log_.read(topic, static_cast<std::uint64_t>(from), max);
      if (!batch.records.empty() ||
          std::chrono::steady_clock::now() >= deadline) {
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    nlohmann::ordered_json j;
    j["topic"] = topic;
    j["next_offset"] = batch.next_offset;
    nlohmann::ordered_json records = nlohmann::ordered_json::array();
    for (auto& [off, line] : batch.records) {
      records.push_back({{"offset", off}, {"event", line}});
    }
    j["records"] = std::move(records);
    res.set_content(j.dump(), "application/json");
  });

  s.Post("/control", [this](const httplib::Request& req,
                            httplib::Response& res) {
    if (req.get_header_value("X-Operator-Token") != options_.operator_token) {
      res.status = 401;
      res.set_content(R"({"error":"bad token"})", "application/json");
      return;
    }
    auto body = nlohmann::json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.contains("command")) {
      res.status = 400;
      res.set_content(R"({"error":"missing command"})", "application/json");
      return;
    }
    std::string cmd = body.at("command").get<std::string>();
    if (!engine_) {
      res.status = 503;
      res.set_content(R"({"error":"no engine attached"})", "application/json");
      return;
    }
    if (cmd == "status") {
      auto st = engine_->status();
      nlohmann::ordered_json j;
      const char* names[] = {"idle", "running", "paused", "finished"};
      j["state"] = names[static_cast<int>(st.state)];
      j["day"] = st.day;
      j["sim_time"] = sim_time_to_iso(st.sim_time);
      j["events_appended"] = st.events_appended;
      j["rec_requests"] = st.rec_requests;
      res.set_content(j.dump(), "application/json");
      return;
    }
    if (cmd == "pause") {
      if (!engine_->pause()) {
        res.status = 409;
        res.set_content(R"({"error":"not running"})", "application/json");
        return;
      }
      res.set_content(R"({"ok":"paused"})", "application/json");
      return;
    }
    if (cmd == "resume") {
      if (!engine_->resume()) {
        res.status = 409;
        res.set_content(R"({"error":"not paused"})", "application/json");
        return;
      }
      res.set_content(R"({"ok":"resumed"})", "application/json");
      return;
    }
    if (cmd == "start") {
      if (!engine_->allow_start()) {
        res.status = 409;
        res.set_content(R"({"error":"already started"})", "application/json");
        return;
      }
      res.set_content(R"({"ok":"started"})", "application/json");
      return;
    }
    if (cmd == "inject_chaos") {
      if (!body.contains("spec")) {
        res.status = 400;
        res.set_content(R"({"error":"missing spec"})", "application/json");
        return;
      }
      try {
        engine_->inject_chaos(chaos_entry_from_json(body.at("spec")));
      } catch (const ConfigError& e) {
        res.status = 400;
        nlohmann::ordered_json j;
        j["error"] = e.what();
        res.set_content(j.dump(), "application/json");
        return;
      }
      res.set_content(R"({"ok":"chaos scheduled"})", "application/json");
      return;
    }
    res.status = 400;
    res.set_content(R"({"error":"unknown command"})", "application/json");
  });

  if (!server_->bind_to_port("0.0.0.0", port)) {
    server_.reset();
    return false;
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return true;
}

void Gateway::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
  server_.reset();
}

}  // namespace flicksim
