#include "flicksim/stubs.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include <httplib.h>

#include "flicksim/rng.hpp"

namespace flicksim {

ScriptedRecommender::ScriptedRecommender(Options opts,
                                         const RatingsCorpus& corpus,
                                         const GroundTruthModel* model)
    : opts_(std::move(opts)), model_(model) {
  if (opts_.top_k < 1) throw std::invalid_argument("stub: top_k < 1");
  if (opts_.mode == Mode::oracle_leak) {
    if (!opts_.test_profile) {
      throw std::invalid_argument(
          "stub: oracle_leak is test-only and requires the test profile");
    }
    if (!model_) throw std::invalid_argument("stub: oracle_leak needs a model");
  }

  if (opts_.mode == Mode::constant_genre) {
    pool_ = corpus.catalog.ids_of_genre(opts_.genre);
    if (pool_.empty()) {
      throw std::invalid_argument("stub: no movies with genre " + opts_.genre);
    }
  } else {
    pool_.reserve(corpus.catalog.movies.size());
    for (const auto& m : corpus.catalog.movies) pool_.push_back(m.movie_id);
    if (pool_.empty()) throw std::invalid_argument("stub: empty catalog");
  }

  if (opts_.mode == Mode::echo_popular) {
    std::map<std::string, std::size_t> counts;
    for (const auto& r : corpus.ratings) ++counts[r.movie_id];
    popular_ = pool_;
    std::stable_sort(popular_.begin(), popular_.end(),
                     [&](const std::string& a, const std::string& b) {
                       auto ca = counts.count(a) ? counts.at(a) : 0;
                       auto cb = counts.count(b) ? counts.at(b) : 0;
                       if (ca != cb) return ca > cb;
                       return a < b;
                     });
    if (popular_.size() > static_cast<std::size_t>(opts_.top_k)) {
      popular_.resize(opts_.top_k);
    }
  }
}

std::string ScriptedRecommender::respond(const std::string& user_id) const {
  std::vector<std::string> picks;
  std::size_t k = std::min<std::size_t>(opts_.top_k, pool_.size());

  switch (opts_.mode) {
    case Mode::echo_popular:
      picks = popular_;
      break;
    case Mode::random:
    case Mode::constant_genre: {
      // per-user sample without replacement, independent of call order
      Rng rng = substream(opts_.seed, "stub", hash_str(user_id));
      std::vector<std::size_t> idx(pool_.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + rng.uniform_index(idx.size() - i);
        std::swap(idx[i], idx[j]);
        picks.push_back(pool_[idx[i]]);
      }
      break;
    }
    case Mode::oracle_leak: {
      std::vector<std::pair<double, const std::string*>> scored;
      scored.reserve(pool_.size());
      for (const auto& id : pool_) {
        if (!model_->has_movie(id) || !model_->has_user(user_id)) continue;
        scored.emplace_back(model_->predict(user_id, id), &id);
      }
      std::stable_sort(scored.begin(), scored.end(),
                       [](const auto& a, const auto& b) {
                         if (a.first != b.first) return a.first > b.first;
                         return *a.second < *b.second;
                       });
      for (std::size_t i = 0; i < scored.size() && picks.size() < k; ++i) {
        picks.push_back(*scored[i].second);
      }
      break;
    }
  }

  std::string body;
  for (std::size_t i = 0; i < picks.size(); ++i) {
    if (i) body += ',';
    body += picks[i];
  }
  return body;
}

StubServer::StubServer(ScriptedRecommender rec) : rec_(std::move(rec)) {}

StubServer::~StubServer() { stop(); }

bool StubServer::start(int port) {
  server_ = std::make_unique<httplib::Server>();
  server_->Get(R"(/recommend/(.+))",
               [this](const httplib::Request& req, httplib::Response& res) {
                 res.set_content(rec_.respond(req.matches[1]), "text/plain");
               });
  if (!server_->bind_to_port("0.0.0.0", port)) {
    server_.reset();
    return false;
  }
  port_ = port;
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return true;
}

void StubServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
  server_.reset();
}

}  // namespace flicksim
