#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "flicksim/corpus.hpp"
#include "flicksim/rng.hpp"

namespace flicksim {

struct FitParams {
  int k = 16;
  int epochs = 20;
  double reg = 0.05;
  double learning_rate = 0.01;
  double init_scale = 0.1;  // stddev of factor initialization
  std::uint64_t seed = 1;
  bool operator==(const FitParams&) const = default;
};

struct DriftSpec {
  enum class Kind { genre_shift, population_shift };
  Kind kind = Kind::population_shift;
  std::string target_genre;
  double rate_per_day = 0.0;
  int start_day = 0;
  int end_day = 0;
  bool operator==(const DriftSpec&) const = default;
};

// Hidden latent-factor preference model: rating ~ mu + b_u + b_m + p_u . q_m,
// clamped to the rating scale. Never exposed through the public API surface.
class GroundTruthModel {
 public:
  GroundTruthModel() = default;

  // Biased matrix factorization by SGD. Deterministic for a fixed seed.
  // Throws on divergence (any non-finite parameter).
  static GroundTruthModel fit(const RatingsCorpus& corpus, FitParams params);

  double predict(const std::string& user_id, const std::string& movie_id) const;
  bool has_user(const std::string& user_id) const;
  bool has_movie(const std::string& movie_id) const;

  // Registers a user unseen at fit time: latent vector sampled near the
  // population centroid, bias zero. No-op if the user exists.
  void add_user(const std::string& user_id, double noise_sigma, Rng& rng);

  // Implicit positive feedback: p_u <- p_u + eta * (q_m - p_u), applied in
  // order. Returns the number of pairs skipped for unknown ids.
  std::size_t apply_feedback(
      std::span<const std::pair<std::string, std::string>> watches, double eta);

  // Scheduled preference drift; `day` must lie inside [start_day, end_day].
  void apply_drift(const DriftSpec& spec, int day, const Catalog& catalog);

  // Convex pull of the given users' factors toward the (rescaled) centroid
  // of the given movies. Backing for population drift and the coupled
  // bias scenario. Unknown ids are ignored.
  void pull_users_toward_movies(std::span<const std::string> movie_ids,
                                std::span<const std::string> user_ids,
                                double rate);

  void save(const std::string& path) const;
  static GroundTruthModel load(const std::string& path);

  double global_mean() const { return mu_; }
  int latent_dim() const { return k_; }
  RatingScale bounds() const { return bounds_; }
  double train_rmse() const { return train_rmse_; }
  const std::vector<std::string>& known_users() const { return user_ids_; }
  const std::vector<std::string>& known_movies() const { return movie_ids_; }

  std::span<const double> user_factors(const std::string& user_id) const;
  std::span<const double> movie_factors(const std::string& movie_id) const;

  bool operator==(const GroundTruthModel&) const = default;

  // test support: direct parameter injection for hand-built fixtures
  struct Builder {
    double mu = 0.0;
    RatingScale bounds;
    int k = 0;
    std::vector<std::string> users, movies;
    std::vector<double> user_bias, movie_bias;
    std::vector<double> user_factors, movie_factors;  // row-major k per id
    GroundTruthModel build() const;
  };

 private:
  std::vector<double> genre_factor_centroid(const std::string& genre,
                                            const Catalog& catalog) const;
  void check_finite(const char* where) const;

  double mu_ = 0.0;
  int k_ = 0;
  RatingScale bounds_;
  double train_rmse_ = 0.0;
  FitParams fit_params_;
  std::vector<std::string> user_ids_, movie_ids_;
  std::unordered_map<std::string, std::size_t> user_index_, movie_index_;
  std::vector<double> user_bias_, movie_bias_;
  std::vector<double> user_factors_, movie_factors_;  // row-major, k per row
};

}  // namespace flicksim
