#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "flicksim/model.hpp"

using namespace flicksim;

namespace {

const std::string kData = FLICKSIM_TEST_DATA_DIR;

// Planted rank-1 corpus: rating = 3 + s_u * t_m with known scalars, no noise.
// A correct factorization should reconstruct the table almost exactly.
RatingsCorpus planted_corpus() {
  RatingsCorpus c;
  std::vector<double> user_s = {-1.0, -0.5, 0.0, 0.5, 1.0, -0.8, 0.3, 0.9};
  std::vector<double> movie_t = {-1.2, -0.6, 0.0, 0.4, 0.8, 1.1};
  for (std::size_t m = 0; m < movie_t.size(); ++m) {
    MovieRecord rec;
    rec.movie_id = "m" + std::to_string(m);
    rec.title = "M" + std::to_string(m) + " (2000)";
    rec.genres = {"Drama"};
    rec.runtime_minutes = 100;
    rec.content_rating = "PG";
    c.catalog.add(std::move(rec));
  }
  std::int64_t ts = 0;
  for (std::size_t u = 0; u < user_s.size(); ++u) {
    for (std::size_t m = 0; m < movie_t.size(); ++m) {
      RatingRow r;
      r.user_id = "u" + std::to_string(u);
      r.movie_id = "m" + std::to_string(m);
      r.rating = 3.0 + user_s[u] * movie_t[m];
      r.timestamp = ++ts;
      c.ratings.push_back(std::move(r));
    }
  }
  return c;
}

RatingsCorpus fixture_corpus() {
  return ingest_corpus(kData + "/ratings.csv", kData + "/movies.csv");
}

double corpus_global_mean(const RatingsCorpus& c) {
  double s = 0;
  for (const auto& r : c.ratings) s += r.rating;
  return s / static_cast<double>(c.ratings.size());
}

}  // namespace

TEST_CASE("fit recovers a planted rank-1 table") {
  RatingsCorpus corpus = planted_corpus();
  FitParams p;
  p.k = 4;
  p.epochs = 400;
  p.reg = 0.0005;
  p.learning_rate = 0.03;
  p.seed = 5;
  GroundTruthModel model = GroundTruthModel::fit(corpus, p);
  double worst = 0;
  for (const auto& r : corpus.ratings) {
    worst = std::max(worst, std::abs(model.predict(r.user_id, r.movie_id) - r.rating));
  }
  CHECK(worst < 0.1);
  CHECK(model.train_rmse() < 0.05);
}

TEST_CASE("fit beats the global-mean baseline on held-out ratings") {
  RatingsCorpus full = fixture_corpus();
  // Hold out every 7th rating; the model never sees it during training.
  RatingsCorpus train = full;
  train.ratings.clear();
  std::vector<RatingRow> held;
  for (std::size_t i = 0; i < full.ratings.size(); ++i) {
    if (i % 7 == 0) {
      held.push_back(full.ratings[i]);
    } else {
      train.ratings.push_back(full.ratings[i]);
    }
  }
  FitParams p;
  p.k = 8;
  p.epochs = 60;
  p.seed = 3;
  GroundTruthModel model = GroundTruthModel::fit(train, p);

  double mean = corpus_global_mean(train);
  double se_model = 0, se_base = 0;
  std::size_t n = 0;
  for (const auto& r : held) {
    if (!model.has_user(r.user_id) || !model.has_movie(r.movie_id)) continue;
    double d = model.predict(r.user_id, r.movie_id) - r.rating;
    double b = mean - r.rating;
    se_model += d * d;
    se_base += b * b;
    ++n;
  }
  REQUIRE(n > 50);
  double rmse_model = std::sqrt(se_model / n);
  double rmse_base = std::sqrt(se_base / n);
  CAPTURE(rmse_model);
  CAPTURE(rmse_base);
  CHECK(rmse_model < rmse_base * 0.95);
}

TEST_CASE("fit is deterministic for a fixed seed") {
  RatingsCorpus corpus = planted_corpus();
  FitParams p;
  p.epochs = 30;
  p.seed = 77;
  GroundTruthModel a = GroundTruthModel::fit(corpus, p);
  GroundTruthModel b = GroundTruthModel::fit(corpus, p);
  CHECK(a == b);
  p.seed = 78;
  GroundTruthModel c = GroundTruthModel::fit(corpus, p);
  CHECK_FALSE(a == c);
}

TEST_CASE("predictions are clamped to the rating scale") {
  GroundTruthModel::Builder b;
  b.mu = 3.0;
  b.k = 1;
  b.users = {"hot", "cold"};
  b.user_bias = {4.0, -4.0};
  b.user_factors = {1.0, -1.0};
  b.movies = {"m"};
  b.movie_bias = {0.0};
  b.movie_factors = {1.0};
  GroundTruthModel m = b.build();
  CHECK(m.predict("hot", "m") == 5.0);
  CHECK(m.predict("cold", "m") == 1.0);
  CHECK_THROWS_AS(m.predict("nobody", "m"), std::out_of_range);
  CHECK_THROWS_AS(m.predict("hot", "no_movie"), std::out_of_range);
}

TEST_CASE("feedback contracts the distance to the watched movie exactly") {
  RatingsCorpus corpus = planted_corpus();
  FitParams p;
  p.epochs = 40;
  p.seed = 11;
  GroundTruthModel m = GroundTruthModel::fit(corpus, p);
  const double eta = 0.05;
  for (const auto& uid : m.known_users()) {
    for (const auto& mid : m.known_movies()) {
      auto pu = m.user_factors(uid);
      auto qm = m.movie_factors(mid);
      double before = 0;
      for (int i = 0; i < m.latent_dim(); ++i) {
        double d = pu[i] - qm[i];
        before += d * d;
      }
      std::pair<std::string, std::string> w{uid, mid};
      m.apply_feedback({&w, 1}, eta);
      pu = m.user_factors(uid);
      double after = 0;
      for (int i = 0; i < m.latent_dim(); ++i) {
        double d = pu[i] - qm[i];
        after += d * d;
      }
      CHECK(std::abs(std::sqrt(after) - (1.0 - eta) * std::sqrt(before)) < 1e-9);
    }
  }
}

TEST_CASE("feedback skips unknown ids and validates eta") {
  GroundTruthModel m = GroundTruthModel::fit(planted_corpus(), FitParams{.epochs = 5});
  std::vector<std::pair<std::string, std::string>> ws = {
      {"u0", "m0"}, {"ghost", "m0"}, {"u0", "ghost"}};
  CHECK(m.apply_feedback(ws, 0.1) == 2);
  CHECK_THROWS_AS(m.apply_feedback(ws, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(m.apply_feedback(ws, 1.5), std::invalid_argument);
}

TEST_CASE("add_user places the newcomer near the population centroid") {
  GroundTruthModel m = GroundTruthModel::fit(planted_corpus(), FitParams{.epochs = 40, .seed = 2});
  std::vector<double> centroid(m.latent_dim(), 0.0);
  for (const auto& uid : m.known_users()) {
    auto pu = m.user_factors(uid);
    for (int i = 0; i < m.latent_dim(); ++i) centroid[i] += pu[i];
  }
  for (auto& x : centroid) x /= static_cast<double>(m.known_users().size());

  Rng rng(123);
  m.add_user("newbie", 0.0, rng);  // zero noise lands exactly on the centroid
  REQUIRE(m.has_user("newbie"));
  auto pn = m.user_factors("newbie");
  for (int i = 0; i < m.latent_dim(); ++i) {
    CHECK(pn[i] == doctest::Approx(centroid[i]).epsilon(1e-12));
  }

  // idempotent: second registration keeps the first vector
  Rng rng2(999);
  m.add_user("newbie", 5.0, rng2);
  auto pn2 = m.user_factors("newbie");
  CHECK(pn2[0] == pn[0]);
}

TEST_CASE("population drift raises predicted affinity on average") {
  RatingsCorpus corpus = fixture_corpus();
  FitParams p;
  p.epochs = 30;
  p.seed = 4;
  GroundTruthModel m = GroundTruthModel::fit(corpus, p);

  DriftSpec drift;
  drift.kind = DriftSpec::Kind::population_shift;
  drift.target_genre = "Action";
  drift.rate_per_day = 0.10;
  drift.start_day = 0;
  drift.end_day = 40;

  // all users are pulled toward one shared target, so every pairwise user
  // distance contracts by exactly (1 - rate) per application
  const auto& users = m.known_users();
  auto dist = [&](const std::string& a, const std::string& b) {
    auto pa = m.user_factors(a);
    auto pb = m.user_factors(b);
    double s = 0;
    for (int f = 0; f < m.latent_dim(); ++f) {
      double d = pa[f] - pb[f];
      s += d * d;
    }
    return std::sqrt(s);
  };

  std::vector<double> before;
  for (std::size_t i = 0; i + 1 < users.size(); i += 7) {
    before.push_back(dist(users[i], users[i + 1]));
  }
  for (int day = 0; day < 25; ++day) m.apply_drift(drift, day, corpus.catalog);
  double shrink = std::pow(1.0 - drift.rate_per_day, 25);
  std::size_t idx = 0;
  for (std::size_t i = 0; i + 1 < users.size(); i += 7, ++idx) {
    CHECK(dist(users[i], users[i + 1]) ==
          doctest::Approx(before[idx] * shrink).epsilon(1e-9));
  }

  CHECK_THROWS_AS(m.apply_drift(drift, 41, corpus.catalog), std::invalid_argument);
}

TEST_CASE("genre drift contracts the targeted genre and leaves the rest alone") {
  RatingsCorpus corpus = fixture_corpus();
  GroundTruthModel m = GroundTruthModel::fit(corpus, FitParams{.epochs = 30, .seed = 6});
  auto horror = corpus.catalog.ids_of_genre("Horror");
  REQUIRE(horror.size() >= 2);

  auto dist = [&](const std::string& a, const std::string& b) {
    auto qa = m.movie_factors(a);
    auto qb = m.movie_factors(b);
    double s = 0;
    for (int f = 0; f < m.latent_dim(); ++f) {
      double d = qa[f] - qb[f];
      s += d * d;
    }
    return std::sqrt(s);
  };
  auto snapshot = [&](const std::string& id) {
    auto q = m.movie_factors(id);
    return std::vector<double>(q.begin(), q.end());
  };

  std::vector<std::string> rest;
  for (const auto& mv : m.known_movies()) {
    if (std::find(horror.begin(), horror.end(), mv) == horror.end()) {
      rest.push_back(mv);
    }
  }
  REQUIRE(!rest.empty());
  std::vector<std::vector<double>> rest_before;
  for (const auto& mv : rest) rest_before.push_back(snapshot(mv));

  double pair_before = dist(horror[0], horror[1]);
  DriftSpec drift;
  drift.kind = DriftSpec::Kind::genre_shift;
  drift.target_genre = "Horror";
  drift.rate_per_day = 0.15;
  drift.start_day = 0;
  drift.end_day = 30;
  for (int day = 0; day < 15; ++day) m.apply_drift(drift, day, corpus.catalog);

  // the targeted genre's movies all converge to one shared target, so their
  // pairwise distance contracts by exactly (1 - rate) per application
  double shrink = std::pow(1.0 - drift.rate_per_day, 15);
  CHECK(dist(horror[0], horror[1]) ==
        doctest::Approx(pair_before * shrink).epsilon(1e-9));

  // movies outside the genre are untouched, bit for bit
  for (std::size_t i = 0; i < rest.size(); ++i) {
    auto q = m.movie_factors(rest[i]);
    for (int f = 0; f < m.latent_dim(); ++f) CHECK(q[f] == rest_before[i][f]);
  }
}

TEST_CASE("save and load round-trip bit-exactly") {
  GroundTruthModel m = GroundTruthModel::fit(planted_corpus(), FitParams{.epochs = 25, .seed = 9});
  std::string path = "/tmp/flicksim_test_model.json";
  m.save(path);
  GroundTruthModel back = GroundTruthModel::load(path);
  CHECK(m == back);
  std::remove(path.c_str());
}

TEST_CASE("load rejects junk") {
  std::string path = "/tmp/flicksim_test_badmodel.json";
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("{\"format\": \"something-else\"}", f);
    std::fclose(f);
  }
  CHECK_THROWS(GroundTruthModel::load(path));
  CHECK_THROWS(GroundTruthModel::load("/nonexistent/model.json"));
  std::remove(path.c_str());
}
