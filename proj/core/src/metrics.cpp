#include "flicksim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace flicksim {

std::vector<WatchSession> attribute_watches(std::span<const Event> events,
                                            SimTime horizon) {
  struct LastRec {
    SimTime ts = 0;
    std::unordered_set<std::string> movies;
  };
  std::unordered_map<std::string, LastRec> last_rec;  // by user
  // open session per (user, movie): index into sessions
  std::unordered_map<std::string, std::size_t> open;
  std::vector<WatchSession> sessions;

  SimTime prev = std::numeric_limits<SimTime>::min();
  for (const auto& e : events) {
    SimTime ts = event_ts(e);
    if (ts < prev) {
      throw std::invalid_argument("attribute_watches: events out of order");
    }
    prev = ts;

    if (const auto* l = std::get_if<RecLogEvent>(&e)) {
      if (l->status_code == 200) {
        LastRec& r = last_rec[l->user_id];
        r.ts = ts;
        r.movies = {l->result.begin(), l->result.end()};
      }
      continue;
    }
    if (const auto* w = std::get_if<WatchEvent>(&e)) {
      std::string key = w->user_id + '\x1f' + w->movie_id;
      if (w->minute == 1) {
        WatchSession s;
        s.user_id = w->user_id;
        s.movie_id = w->movie_id;
        s.start = ts;
        s.last_minute = 1;
        auto it = last_rec.find(w->user_id);
        // causal: only recommendations at or before session start count
        s.attributed = it != last_rec.end() && it->second.ts <= ts &&
                       ts - it->second.ts <= horizon &&
                       it->second.movies.count(w->movie_id) > 0;
        open[key] = sessions.size();
        sessions.push_back(std::move(s));
      } else {
        auto it = open.find(key);
        if (it != open.end()) {
          sessions[it->second].last_minute =
              std::max(sessions[it->second].last_minute, w->minute);
        }
      }
      continue;
    }
    const auto& r = std::get<RateEvent>(e);
    auto it = open.find(r.user_id + '\x1f' + r.movie_id);
    if (it != open.end()) sessions[it->second].rating = r.rating;
  }
  return sessions;
}

MetricsWindow compute_window(std::span<const Event> events, SimTime start,
                             SimTime end, const Catalog& catalog,
                             SimTime horizon) {
  if (end < start) throw std::invalid_argument("compute_window: end < start");
  MetricsWindow w;
  w.start = start;
  w.end = end;

  auto sessions = attribute_watches(events, horizon);

  double rating_sum_attr = 0.0;
  std::uint64_t rated_attr = 0;
  std::uint64_t completed = 0;
  std::map<std::string, double> genre_mass;
  double total_mass = 0.0;

  for (const auto& s : sessions) {
    if (s.start < start || s.start >= end) continue;
    ++w.watches;
    if (s.attributed) {
      ++w.attributed_watches;
      if (s.rating) {
        rating_sum_attr += *s.rating;
        ++rated_attr;
      }
    }
    const MovieRecord* m = catalog.find(s.movie_id);
    if (m && m->runtime_minutes == s.last_minute) ++completed;
    if (m && !m->genres.empty()) {
      double frac = 1.0 / static_cast<double>(m->genres.size());
      for (const auto& g : m->genres) genre_mass[g] += frac;
      total_mass += 1.0;
    }
  }

  for (const auto& e : events) {
    SimTime ts = event_ts(e);
    if (ts < start || ts >= end) continue;
    if (const auto* l = std::get_if<RecLogEvent>(&e)) {
      ++w.requests;
      if (l->status_code == 200) ++w.successes;
    } else if (std::holds_alternative<RateEvent>(e)) {
      ++w.ratings;
    }
  }

  if (w.watches > 0) {
    w.rec_hit_rate =
        static_cast<double>(w.attributed_watches) / static_cast<double>(w.watches);
    w.completion_rate =
        static_cast<double>(completed) / static_cast<double>(w.watches);
  }
  if (rated_attr > 0) {
    w.avg_rating_recommended = rating_sum_attr / static_cast<double>(rated_attr);
  }
  if (w.requests > 0) {
    w.request_success_rate =
        static_cast<double>(w.successes) / static_cast<double>(w.requests);
  }
  if (total_mass > 0) {
    double h = 0.0;
    for (auto& [g, mass] : genre_mass) {
      double p = mass / total_mass;
      w.genre_watch_share[g] = p;
      if (p > 0) h -= p * std::log2(p);
    }
    w.genre_entropy = h;
  }
  return w;
}

namespace {

std::string fmt_opt(const std::optional<double>& v) {
  if (!v) return "absent";
  std::ostringstream os;
  os << *v;
  return os.str();
}

// least-squares slope of y over index 0..n-1
double slope(const std::vector<double>& ys) {
  std::size_t n = ys.size();
  double mx = (static_cast<double>(n) - 1.0) / 2.0;
  double my = 0.0;
  for (double y : ys) my += y;
  my /= static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = static_cast<double>(i) - mx;
    num += dx * (ys[i] - my);
    den += dx * dx;
  }
  return den > 0 ? num / den : 0.0;
}

}  // namespace

std::string MetricsWindow::to_text() const {
  std::ostringstream os;
  os << "window=[" << sim_time_to_iso(start) << "," << sim_time_to_iso(end)
     << ") watches=" << watches << " attributed=" << attributed_watches
     << " ratings=" << ratings << " requests=" << requests
     << " successes=" << successes << " rec_hit_rate=" << fmt_opt(rec_hit_rate)
     << " completion_rate=" << fmt_opt(completion_rate)
     << " avg_rating_recommended=" << fmt_opt(avg_rating_recommended)
     << " request_success_rate=" << fmt_opt(request_success_rate)
     << " genre_entropy=" << fmt_opt(genre_entropy);
  return os.str();
}

std::string TrendReport::to_text() const {
  std::ostringstream os;
  os << "entropy_slope=" << entropy_slope
     << " entropy_declining=" << (entropy_declining ? "yes" : "no");
  for (const auto& [g, s] : genre_share_slope) {
    os << " share_slope[" << g << "]=" << s;
  }
  return os.str();
}

TrendReport feedback_indicator(std::span<const MetricsWindow> windows,
                               double decline_threshold) {
  if (windows.size() < 3) {
    throw std::invalid_argument("feedback_indicator: need >= 3 windows");
  }
  TrendReport report;

  std::vector<double> entropy;
  for (const auto& w : windows) {
    if (w.genre_entropy) entropy.push_back(*w.genre_entropy);
  }
  if (entropy.size() >= 3) {
    report.entropy_slope = slope(entropy);
    report.entropy_declining = report.entropy_slope < -decline_threshold;
  }

  std::unordered_set<std::string> genres;
  for (const auto& w : windows) {
    for (const auto& [g, _] : w.genre_watch_share) genres.insert(g);
  }
  for (const auto& g : genres) {
    std::vector<double> shares;
    shares.reserve(windows.size());
    for (const auto& w : windows) {
      auto it = w.genre_watch_share.find(g);
      shares.push_back(it == w.genre_watch_share.end() ? 0.0 : it->second);
    }
    report.genre_share_slope[g] = slope(shares);
  }
  return report;
}

}  // namespace flicksim
