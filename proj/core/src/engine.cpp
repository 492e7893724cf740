#include "flicksim/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace flicksim {

namespace {

// relative hourly session weights, roughly evening-heavy
constexpr double kDiurnalWeights[24] = {
    1, 1, 1, 1, 1, 2, 3, 4, 5, 5, 4, 4, 5, 5, 5, 6, 7, 8, 10, 12, 12, 10, 6, 3};

int sample_diurnal_minute(Rng& rng) {
  double total = 0.0;
  for (double w : kDiurnalWeights) total += w;
  double x = rng.uniform() * total;
  int hour = 0;
  for (; hour < 23; ++hour) {
    x -= kDiurnalWeights[hour];
    if (x < 0) break;
  }
  return hour * 60 + static_cast<int>(rng.uniform_index(60));
}

}  // namespace

std::vector<SessionPlan> plan_day(std::span<const UserProfile> users, int day,
                                  double base_rate, std::uint64_t seed,
                                  int day_length) {
  if (base_rate < 0) throw std::invalid_argument("plan_day: base_rate < 0");
  std::vector<SessionPlan> plans;
  const SimTime start = day_start(day, day_length);
  for (const auto& u : users) {
    Rng rng = substream(seed, "plan", hash_str(u.user_id), day);
    int sessions = rng.poisson(u.activity_level * base_rate);
    for (int s = 0; s < sessions; ++s) {
      int minute = day_length == kMinutesPerDay
                       ? sample_diurnal_minute(rng)
                       : static_cast<int>(rng.uniform_index(day_length));
      plans.push_back({u.user_id, start + minute});
    }
  }
  std::stable_sort(plans.begin(), plans.end(),
                   [](const SessionPlan& a, const SessionPlan& b) {
                     return a.start < b.start;
                   });
  return plans;
}

Selection select_movie(const std::string& user_id,
                       std::span<const std::string> recommended,
                       const SelectionParams& params,
                       const GroundTruthModel& model, const Catalog& catalog,
                       Rng& rng) {
  if (catalog.movies.empty()) {
    throw std::invalid_argument("select_movie: empty catalog");
  }
  struct Candidate {
    const std::string* id;
    bool recommended;
  };
  std::vector<Candidate> candidates;
  std::unordered_map<std::string_view, bool> seen;
  Selection sel;

  for (const auto& id : recommended) {
    if (!catalog.find(id) || !model.has_movie(id)) {
      ++sel.invalid_recommended;
      continue;
    }
    if (seen.emplace(id, true).second) candidates.push_back({&id, true});
  }
  for (int i = 0; i < params.n_random; ++i) {
    const auto& id =
        catalog.movies[rng.uniform_index(catalog.movies.size())].movie_id;
    if (seen.emplace(id, false).second) candidates.push_back({&id, false});
  }

  if (candidates.empty()) {
    // possible when n_random == 0 and every recommended id was invalid
    sel.movie_id =
        catalog.movies[rng.uniform_index(catalog.movies.size())].movie_id;
    return sel;
  }

  double best = 0.0;
  const Candidate* winner = nullptr;
  for (const auto& c : candidates) {
    double score = model.predict(user_id, *c.id);
    if (params.sigma_select > 0) score += rng.normal(0.0, params.sigma_select);
    if (c.recommended) score += params.bonus_rec;
    if (!winner || score > best) {  // stable: first candidate wins ties
      best = score;
      winner = &c;
    }
  }
  sel.movie_id = *winner->id;
  sel.was_recommended = winner->recommended;
  return sel;
}

std::vector<WatchEvent> emit_watch_sequence(const std::string& user_id,
                                            const MovieRecord& movie,
                                            SimTime start,
                                            const GroundTruthModel& model,
                                            const WatchParams& params,
                                            Rng& rng) {
  if (movie.runtime_minutes < 1) {
    throw std::invalid_argument("emit_watch_sequence: runtime < 1");
  }
  double pred = model.predict(user_id, movie.movie_id);
  double p_complete =
      1.0 / (1.0 + std::exp(-params.completion_steepness *
                            (pred - params.completion_midpoint)));
  int watched;
  if (rng.bernoulli(p_complete) || movie.runtime_minutes == 1) {
    watched = movie.runtime_minutes;
  } else {
    watched = 1 + static_cast<int>(rng.uniform_index(
                      static_cast<std::uint64_t>(movie.runtime_minutes - 1)));
  }
  std::vector<WatchEvent> events;
  events.reserve(watched);
  for (int m = 1; m <= watched; ++m) {
    events.push_back({start + m, user_id, movie.movie_id, m});
  }
  return events;
}

int round_half_away_from_zero(double x) {
  return static_cast<int>(x >= 0 ? std::floor(x + 0.5) : std::ceil(x - 0.5));
}

std::optional<RateEvent> maybe_emit_rating(const std::string& user_id,
                                           const std::string& movie_id,
                                           SimTime ts,
                                           const SelectionParams& params,
                                           const GroundTruthModel& model,
                                           Rng& rng) {
  if (!rng.bernoulli(params.p_rate)) return std::nullopt;
  double x = model.predict(user_id, movie_id);
  if (params.sigma_rate > 0) x += rng.normal(0.0, params.sigma_rate);
  x += params.bonus_watched;
  int stars = std::clamp(round_half_away_from_zero(x), 1, 5);
  return RateEvent{ts, user_id, movie_id, stars};
}

const UserProfile* World::find_profile(const std::string& user_id) const {
  for (const auto& p : profiles) {
    if (p.user_id == user_id) return &p;
  }
  return nullptr;
}

std::string RunSummary::to_text() const {
  std::ostringstream os;
  os << "days_completed=" << days_completed << "\n"
     << "sessions=" << sessions << "\n"
     << "watch_events=" << watch_events << "\n"
     << "rating_events=" << rating_events << "\n"
     << "rec_requests=" << rec_requests << "\n"
     << "rec_successes=" << rec_successes << "\n"
     << "feedback_skipped=" << feedback_skipped << "\n"
     << "wall_seconds=" << wall_seconds << "\n"
     << "events_per_second=" << events_per_second << "\n";
  return os.str();
}

Engine::Engine(EngineConfig config, World& world, EventLog& log,
               RecClient& client)
    : config_(std::move(config)), world_(world), log_(log), client_(client) {}

void Engine::append_event(const Event& e) {
  std::uint64_t n = events_appended_.fetch_add(1);
  std::string line = serialize_event(e, wire_version_);
  std::string wire = line;
  if (effects_.event_corruption && effects_.event_corruption->q > 0) {
    Rng rng = substream(config_.seed, "corrupt-line", n);
    wire = corrupt_event_line(line, *effects_.event_corruption, rng, &audit_,
                              current_day_.load());
  }
  log_.append(kTopicAll, wire);
  if (std::holds_alternative<WatchEvent>(e)) {
    log_.append(kTopicWatch, wire);
    ++summary_.watch_events;
  } else if (std::holds_alternative<RateEvent>(e)) {
    log_.append(kTopicRate, wire);
    ++summary_.rating_events;
  } else {
    log_.append(kTopicRecLog, wire);
  }
  sim_now_.store(event_ts(e));
}

void Engine::throttle(SimTime ts) {
  if (config_.speed <= 0.0) return;
  if (ts <= last_throttle_ts_) return;
  wall_ms_debt_ +=
      static_cast<double>(ts - last_throttle_ts_) * config_.speed;
  last_throttle_ts_ = ts;
  if (wall_ms_debt_ >= 1.0) {
    auto ms = static_cast<std::int64_t>(wall_ms_debt_);
    wall_ms_debt_ -= static_cast<double>(ms);
    std::this_thread::sleep_for(std::chrono::milliseconds(ms));
  }
}

void Engine::checkpoint_pause() {
  std::unique_lock lk(state_mu_);
  state_cv_.wait(lk, [this] {
    return state_ != State::paused || stop_requested_.load();
  });
}

bool Engine::pause() {
  std::lock_guard lk(state_mu_);
  if (state_ != State::running) return false;
  state_ = State::paused;
  return true;
}

bool Engine::allow_start() {
  {
    std::lock_guard lk(state_mu_);
    if (start_released_ || state_ != State::idle) return false;
    start_released_ = true;
  }
  state_cv_.notify_all();
  return true;
}

bool Engine::resume() {
  {
    std::lock_guard lk(state_mu_);
    if (state_ != State::paused) return false;
    state_ = State::running;
  }
  state_cv_.notify_all();
  return true;
}

void Engine::request_stop() {
  stop_requested_.store(true);
  state_cv_.notify_all();
}

void Engine::inject_chaos(ChaosEntry entry) {
  std::lock_guard lk(injected_mu_);
  injected_.push_back(std::move(entry));
}

Engine::Status Engine::status() const {
  Status st;
  {
    std::lock_guard lk(state_mu_);
    st.state = state_;
  }
  st.day = current_day_.load();
  st.sim_time = sim_now_.load();
  st.events_appended = events_appended_.load();
  st.rec_requests = rec_requests_.load();
  return st;
}

void Engine::handle_session(const std::string& user_id, SimTime ts) {
  ++summary_.sessions;
  const int day = current_day_.load();
  std::vector<std::string> recommended;
  if (!config_.routes.empty()) {
    const std::string& endpoint =
        canary_route(user_id, config_.routes, config_.route_salt);
    RecRequestOutcome outcome = client_.request(endpoint, user_id);
    ++summary_.rec_requests;
    rec_requests_.fetch_add(1);
    if (outcome.status_code == 200) ++summary_.rec_successes;
    recommended = outcome.result;
    append_event(RecLogEvent{ts, user_id, endpoint, outcome.status_code,
                             outcome.result, outcome.latency_ms});
  }

  // per-(user, day) session ordinal keeps substreams stable regardless of
  // how sessions from other users interleave
  int s = session_ordinal_[user_id]++;
  Rng select_rng = substream(config_.seed, "select", hash_str(user_id),
                             static_cast<std::uint64_t>(day), s);
  Selection sel = select_movie(user_id, recommended, config_.selection,
                               world_.model, world_.catalog, select_rng);
  day_watches_.emplace_back(user_id, sel.movie_id);

  const MovieRecord* movie = world_.catalog.find(sel.movie_id);
  Rng watch_rng = substream(config_.seed, "watch", hash_str(user_id),
                            static_cast<std::uint64_t>(day), s);
  auto watches = emit_watch_sequence(user_id, *movie, ts, world_.model,
                                     config_.watch, watch_rng);
  for (auto& w : watches) pending_.push(QItem{w.ts, next_seq_++, Event{w}});

  Rng rate_rng = substream(config_.seed, "rate", hash_str(user_id),
                           static_cast<std::uint64_t>(day), s);
  SimTime after = ts + static_cast<SimTime>(watches.size());
  auto rating = maybe_emit_rating(user_id, sel.movie_id, after,
                                  config_.selection, world_.model, rate_rng);
  if (rating) pending_.push(QItem{rating->ts, next_seq_++, Event{*rating}});
}

RunSummary Engine::run() {
  {
    std::unique_lock lk(state_mu_);
    if (state_ != State::idle) throw std::logic_error("engine: already ran");
    if (config_.wait_for_start) {
      state_cv_.wait(lk, [this] {
        return start_released_ || stop_requested_.load();
      });
    } else {
      start_released_ = true;
    }
    state_ = State::running;
  }
  auto wall0 = std::chrono::steady_clock::now();
  std::optional<BiasSpec> applied_bias;

  for (int day = 0; day < config_.n_days && !stop_requested_.load(); ++day) {
    current_day_.store(day);
    {
      std::lock_guard lk(injected_mu_);
      for (auto& e : injected_) config_.chaos.add(std::move(e));
      injected_.clear();
    }
    {
      std::unique_lock wl(world_mu_);
      effects_ = activate(config_.chaos, day);
      wire_version_ = effects_.format_version;
      if (effects_.bias &&
          (!applied_bias || applied_bias->segment_age_min !=
                                effects_.bias->segment_age_min ||
           applied_bias->segment_age_max != effects_.bias->segment_age_max ||
           applied_bias->age_offset != effects_.bias->age_offset)) {
        const BiasSpec& b = *effects_.bias;
        bias_demographics(
            world_.profiles,
            [&b](const UserProfile& p) {
              return p.true_age >= b.segment_age_min &&
                     p.true_age <= b.segment_age_max;
            },
            b.age_offset, &audit_, day);
        applied_bias = b;
      }
      for (const auto& drift : effects_.drifts) {
        world_.model.apply_drift(drift, day, world_.catalog);
      }
      if (effects_.bias && effects_.bias->couple_population_shift) {
        std::vector<std::string> r_movies;
        for (const auto& m : world_.catalog.movies) {
          if (m.content_rating == "R") r_movies.push_back(m.movie_id);
        }
        std::vector<std::string> segment;
        for (const auto& p : world_.profiles) {
          if (p.true_age >= effects_.bias->segment_age_min &&
              p.true_age <= effects_.bias->segment_age_max) {
            segment.push_back(p.user_id);
          }
        }
        world_.model.pull_users_toward_movies(
            r_movies, segment, effects_.bias->shift_rate_per_day);
      }
    }

    auto plans = plan_day(world_.profiles, day, config_.base_rate,
                          config_.seed, config_.day_length);
    for (const auto& p : plans) {
      pending_.push(QItem{p.start, next_seq_++, p.user_id});
    }
    session_ordinal_.clear();

    const SimTime day_end = day_start(day + 1, config_.day_length);
    while (!pending_.empty() && pending_.top().ts < day_end &&
           !stop_requested_.load()) {
      checkpoint_pause();
      QItem item = pending_.top();
      pending_.pop();
      throttle(item.ts);
      if (std::holds_alternative<std::string>(item.payload)) {
        handle_session(std::get<std::string>(item.payload), item.ts);
      } else {
        append_event(std::get<Event>(item.payload));
      }
    }

    {
      std::unique_lock wl(world_mu_);
      if (config_.feedback_cadence_days > 0 &&
          (day + 1) % config_.feedback_cadence_days == 0) {
        summary_.feedback_skipped +=
            world_.model.apply_feedback(day_watches_, config_.feedback_eta);
        day_watches_.clear();
      }
    }
    summary_.days_completed = day + 1;
  }

  // drain events scheduled past the final midnight
  while (!pending_.empty() && !stop_requested_.load()) {
    QItem item = pending_.top();
    pending_.pop();
    throttle(item.ts);
    if (std::holds_alternative<std::string>(item.payload)) {
      handle_session(std::get<std::string>(item.payload), item.ts);
    } else {
      append_event(std::get<Event>(item.payload));
    }
  }

  auto wall1 = std::chrono::steady_clock::now();
  summary_.wall_seconds =
      std::chrono::duration<double>(wall1 - wall0).count();
  std::uint64_t total = events_appended_.load();
  summary_.events_per_second =
      summary_.wall_seconds > 0 ? static_cast<double>(total) / summary_.wall_seconds
                                : 0.0;
  {
    std::lock_guard lk(state_mu_);
    state_ = State::finished;
  }
  return summary_;
}

}  // namespace flicksim
