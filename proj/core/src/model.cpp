#include "flicksim/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace flicksim {

namespace {

double clamp_rating(double x, RatingScale b) {
  return std::min(std::max(x, b.lo), b.hi);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

GroundTruthModel GroundTruthModel::fit(const RatingsCorpus& corpus,
                                       FitParams params) {
  if (corpus.ratings.empty()) throw std::invalid_argument("fit: empty corpus");
  if (params.k < 1) throw std::invalid_argument("fit: k < 1");
  if (params.epochs < 1) throw std::invalid_argument("fit: epochs < 1");

  GroundTruthModel m;
  m.bounds_ = corpus.scale;
  m.k_ = params.k;
  m.fit_params_ = params;

  for (const auto& r : corpus.ratings) {
    if (!m.user_index_.count(r.user_id)) {
      m.user_index_.emplace(r.user_id, m.user_ids_.size());
      m.user_ids_.push_back(r.user_id);
    }
  }
  for (const auto& mv : corpus.catalog.movies) {
    m.movie_index_.emplace(mv.movie_id, m.movie_ids_.size());
    m.movie_ids_.push_back(mv.movie_id);
  }

  const std::size_t nu = m.user_ids_.size();
  const std::size_t nm = m.movie_ids_.size();
  const int k = params.k;
  m.user_bias_.assign(nu, 0.0);
  m.movie_bias_.assign(nm, 0.0);
  m.user_factors_.resize(nu * k);
  m.movie_factors_.resize(nm * k);

  Rng init = substream(params.seed, "mf-init");
  const double sigma = params.init_scale / std::sqrt(static_cast<double>(k));
  for (auto& v : m.user_factors_) v = init.normal(0.0, sigma);
  for (auto& v : m.movie_factors_) v = init.normal(0.0, sigma);

  double sum = 0.0;
  for (const auto& r : corpus.ratings) sum += r.rating;
  m.mu_ = sum / static_cast<double>(corpus.ratings.size());

  std::vector<std::size_t> order(corpus.ratings.size());
  std::iota(order.begin(), order.end(), 0);

  const double lr = params.learning_rate;
  const double reg = params.reg;
  double rmse = 0.0;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    Rng shuffle = substream(params.seed, "mf-shuffle", epoch);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle.uniform_index(i)]);
    }
    double sq = 0.0;
    for (std::size_t idx : order) {
      const auto& r = corpus.ratings[idx];
      std::size_t u = m.user_index_.at(r.user_id);
      std::size_t v = m.movie_index_.at(r.movie_id);
      double* p = &m.user_factors_[u * k];
      double* q = &m.movie_factors_[v * k];
      double pred = m.mu_ + m.user_bias_[u] + m.movie_bias_[v] +
                    dot({p, static_cast<std::size_t>(k)},
                        {q, static_cast<std::size_t>(k)});
      double e = r.rating - pred;
      sq += e * e;
      m.user_bias_[u] += lr * (e - reg * m.user_bias_[u]);
      m.movie_bias_[v] += lr * (e - reg * m.movie_bias_[v]);
      for (int f = 0; f < k; ++f) {
        double pf = p[f];
        p[f] += lr * (e * q[f] - reg * pf);
        q[f] += lr * (e * pf - reg * q[f]);
      }
    }
    rmse = std::sqrt(sq / static_cast<double>(order.size()));
    m.check_finite("fit");
  }
  m.train_rmse_ = rmse;
  return m;
}

void GroundTruthModel::check_finite(const char* where) const {
  auto finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(),
                       [](double x) { return std::isfinite(x); });
  };
  if (!std::isfinite(mu_) || !finite(user_bias_) || !finite(movie_bias_) ||
      !finite(user_factors_) || !finite(movie_factors_)) {
    throw std::runtime_error(std::string(where) +
                             ": model diverged (non-finite parameter); "
                             "reduce learning rate or increase regularization");
  }
}

double GroundTruthModel::predict(const std::string& user_id,
                                 const std::string& movie_id) const {
  auto ui = user_index_.find(user_id);
  if (ui == user_index_.end()) {
    throw std::out_of_range("predict: unknown user " + user_id);
  }
  auto mi = movie_index_.find(movie_id);
  if (mi == movie_index_.end()) {
    throw std::out_of_range("predict: unknown movie " + movie_id);
  }
  std::size_t u = ui->second, v = mi->second;
  double raw =
      mu_ + user_bias_[u] + movie_bias_[v] +
      dot({&user_factors_[u * k_], static_cast<std::size_t>(k_)},
          {&movie_factors_[v * k_], static_cast<std::size_t>(k_)});
  return clamp_rating(raw, bounds_);
}

bool GroundTruthModel::has_user(const std::string& user_id) const {
  return user_index_.count(user_id) != 0;
}

bool GroundTruthModel::has_movie(const std::string& movie_id) const {
  return movie_index_.count(movie_id) != 0;
}

std::span<const double> GroundTruthModel::user_factors(
    const std::string& user_id) const {
  std::size_t u = user_index_.at(user_id);
  return {&user_factors_[u * k_], static_cast<std::size_t>(k_)};
}

std::span<const double> GroundTruthModel::movie_factors(
    const std::string& movie_id) const {
  std::size_t v = movie_index_.at(movie_id);
  return {&movie_factors_[v * k_], static_cast<std::size_t>(k_)};
}

void GroundTruthModel::add_user(const std::string& user_id, double noise_sigma,
                                Rng& rng) {
  if (user_index_.count(user_id)) return;
  std::vector<double> centroid(k_, 0.0);
  if (!user_ids_.empty()) {
    for (std::size_t u = 0; u < user_ids_.size(); ++u) {
      for (int f = 0; f < k_; ++f) centroid[f] += user_factors_[u * k_ + f];
    }
    for (auto& c : centroid) c /= static_cast<double>(user_ids_.size());
  }
  user_index_.emplace(user_id, user_ids_.size());
  user_ids_.push_back(user_id);
  user_bias_.push_back(0.0);
  for (int f = 0; f < k_; ++f) {
    user_factors_.push_back(centroid[f] + rng.normal(0.0, noise_sigma));
  }
}

std::size_t GroundTruthModel::apply_feedback(
    std::span<const std::pair<std::string, std::string>> watches, double eta) {
  if (eta < 0.0 || eta > 1.0) {
    throw std::invalid_argument("apply_feedback: eta outside [0,1]");
  }
  std::size_t skipped = 0;
  for (const auto& [user_id, movie_id] : watches) {
    auto ui = user_index_.find(user_id);
    auto mi = movie_index_.find(movie_id);
    if (ui == user_index_.end() || mi == movie_index_.end()) {
      ++skipped;
      continue;
    }
    double* p = &user_factors_[ui->second * k_];
    const double* q = &movie_factors_[mi->second * k_];
    for (int f = 0; f < k_; ++f) p[f] += eta * (q[f] - p[f]);
  }
  check_finite("apply_feedback");
  return skipped;
}

std::vector<double> GroundTruthModel::genre_factor_centroid(
    const std::string& genre, const Catalog& catalog) const {
  std::vector<double> c(k_, 0.0);
  std::size_t n = 0;
  for (const auto& id : catalog.ids_of_genre(genre)) {
    auto mi = movie_index_.find(id);
    if (mi == movie_index_.end()) continue;
    const double* q = &movie_factors_[mi->second * k_];
    for (int f = 0; f < k_; ++f) c[f] += q[f];
    ++n;
  }
  if (n == 0) {
    throw std::invalid_argument("apply_drift: no movies with genre " + genre);
  }
  for (auto& x : c) x /= static_cast<double>(n);
  return c;
}

namespace {

// Centroid rescaled beyond its own norm so repeated application keeps
// raising affinity instead of stalling at the centroid.
std::vector<double> rescaled_target(std::vector<double> c, int k) {
  double norm = std::sqrt(dot(c, c));
  if (norm > 1e-12) {
    double scale = (norm + 1.0) / norm;
    for (auto& x : c) x *= scale;
  } else {
    c.assign(k, 1.0 / std::sqrt(static_cast<double>(k)));
  }
  return c;
}

}  // namespace

void GroundTruthModel::pull_users_toward_movies(
    std::span<const std::string> movie_ids,
    std::span<const std::string> user_ids, double rate) {
  std::vector<double> c(k_, 0.0);
  std::size_t n = 0;
  for (const auto& id : movie_ids) {
    auto mi = movie_index_.find(id);
    if (mi == movie_index_.end()) continue;
    const double* q = &movie_factors_[mi->second * k_];
    for (int f = 0; f < k_; ++f) c[f] += q[f];
    ++n;
  }
  if (n == 0 || rate == 0.0) return;
  for (auto& x : c) x /= static_cast<double>(n);
  std::vector<double> target = rescaled_target(std::move(c), k_);
  rate = std::clamp(rate, 0.0, 1.0);
  for (const auto& id : user_ids) {
    auto ui = user_index_.find(id);
    if (ui == user_index_.end()) continue;
    double* p = &user_factors_[ui->second * k_];
    for (int f = 0; f < k_; ++f) p[f] += rate * (target[f] - p[f]);
  }
  check_finite("pull_users_toward_movies");
}

void GroundTruthModel::apply_drift(const DriftSpec& spec, int day,
                                   const Catalog& catalog) {
  if (day < spec.start_day || day > spec.end_day) {
    throw std::invalid_argument("apply_drift: day outside drift window");
  }
  if (!std::isfinite(spec.rate_per_day)) {
    throw std::invalid_argument("apply_drift: non-finite rate");
  }
  if (spec.rate_per_day == 0.0) return;
  double rate = std::clamp(spec.rate_per_day, 0.0, 1.0);

  std::vector<double> target =
      rescaled_target(genre_factor_centroid(spec.target_genre, catalog), k_);

  if (spec.kind == DriftSpec::Kind::population_shift) {
    for (std::size_t u = 0; u < user_ids_.size(); ++u) {
      double* p = &user_factors_[u * k_];
      for (int f = 0; f < k_; ++f) p[f] += rate * (target[f] - p[f]);
    }
  } else {
    for (const auto& id : catalog.ids_of_genre(spec.target_genre)) {
      auto mi = movie_index_.find(id);
      if (mi == movie_index_.end()) continue;
      double* q = &movie_factors_[mi->second * k_];
      for (int f = 0; f < k_; ++f) q[f] += rate * (target[f] - q[f]);
    }
  }
  check_finite("apply_drift");
}

GroundTruthModel GroundTruthModel::Builder::build() const {
  GroundTruthModel m;
  m.mu_ = mu;
  m.bounds_ = bounds;
  m.k_ = k;
  m.user_ids_ = users;
  m.movie_ids_ = movies;
  for (std::size_t i = 0; i < users.size(); ++i) m.user_index_.emplace(users[i], i);
  for (std::size_t i = 0; i < movies.size(); ++i) m.movie_index_.emplace(movies[i], i);
  m.user_bias_ = user_bias.empty() ? std::vector<double>(users.size(), 0.0) : user_bias;
  m.movie_bias_ = movie_bias.empty() ? std::vector<double>(movies.size(), 0.0) : movie_bias;
  m.user_factors_ = user_factors.empty() ? std::vector<double>(users.size() * k, 0.0) : user_factors;
  m.movie_factors_ = movie_factors.empty() ? std::vector<double>(movies.size() * k, 0.0) : movie_factors;
  return m;
}

void GroundTruthModel::save(const std::string& path) const {
  nlohmann::ordered_json j;
  j["format"] = "flicksim-model";
  j["version"] = 1;
  j["seed"] = fit_params_.seed;
  j["hyperparameters"] = {{"k", fit_params_.k},
                          {"epochs", fit_params_.epochs},
                          {"reg", fit_params_.reg},
                          {"learning_rate", fit_params_.learning_rate},
                          {"init_scale", fit_params_.init_scale}};
  j["mu"] = mu_;
  j["k"] = k_;
  j["bounds"] = {bounds_.lo, bounds_.hi};
  j["train_rmse"] = train_rmse_;
  j["users"] = user_ids_;
  j["movies"] = movie_ids_;
  j["user_bias"] = user_bias_;
  j["movie_bias"] = movie_bias_;
  j["user_factors"] = user_factors_;
  j["movie_factors"] = movie_factors_;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << j.dump();
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

GroundTruthModel GroundTruthModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  if (j.value("format", "") != "flicksim-model") {
    throw std::runtime_error("not a model checkpoint: " + path);
  }
  GroundTruthModel m;
  m.mu_ = j.at("mu").get<double>();
  m.k_ = j.at("k").get<int>();
  m.bounds_.lo = j.at("bounds")[0].get<double>();
  m.bounds_.hi = j.at("bounds")[1].get<double>();
  m.train_rmse_ = j.at("train_rmse").get<double>();
  m.fit_params_.seed = j.at("seed").get<std::uint64_t>();
  const auto& h = j.at("hyperparameters");
  m.fit_params_.k = h.at("k").get<int>();
  m.fit_params_.epochs = h.at("epochs").get<int>();
  m.fit_params_.reg = h.at("reg").get<double>();
  m.fit_params_.learning_rate = h.at("learning_rate").get<double>();
  m.fit_params_.init_scale = h.at("init_scale").get<double>();
  m.user_ids_ = j.at("users").get<std::vector<std::string>>();
  m.movie_ids_ = j.at("movies").get<std::vector<std::string>>();
  m.user_bias_ = j.at("user_bias").get<std::vector<double>>();
  m.movie_bias_ = j.at("movie_bias").get<std::vector<double>>();
  m.user_factors_ = j.at("user_factors").get<std::vector<double>>();
  m.movie_factors_ = j.at("movie_factors").get<std::vector<double>>();
  for (std::size_t i = 0; i < m.user_ids_.size(); ++i) {
    m.user_index_.emplace(m.user_ids_[i], i);
  }
  for (std::size_t i = 0; i < m.movie_ids_.size(); ++i) {
    m.movie_index_.emplace(m.movie_ids_[i], i);
  }
  m.check_finite("load");
  return m;
}

}  // namespace flicksim
