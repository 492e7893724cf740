#include <doctest.h>

#include <cmath>
#include <map>
#include <string>

#include "flicksim/rec_client.hpp"
#include "flicksim/stubs.hpp"

using namespace flicksim;

namespace {

const std::string kData = FLICKSIM_TEST_DATA_DIR;
constexpr int kStubPort = 18431;

RatingsCorpus fixture_corpus() {
  return ingest_corpus(kData + "/ratings.csv", kData + "/movies.csv");
}

}  // namespace

TEST_CASE("canary_route splits users roughly by weight and is stable") {
  std::vector<RecRoute> routes = {{"http://a", 3.0}, {"http://b", 1.0}};
  std::map<std::string, int> counts;
  for (int i = 0; i < 20000; ++i) {
    std::string user = "user_" + std::to_string(i);
    const std::string& arm = canary_route(user, routes, 9);
    ++counts[arm];
    // stable: the same user always lands on the same arm
    CHECK(canary_route(user, routes, 9) == arm);
  }
  double share_a = counts["http://a"] / 20000.0;
  CHECK(std::abs(share_a - 0.75) < 0.02);

  // a different salt reassigns users
  int moved = 0;
  for (int i = 0; i < 1000; ++i) {
    std::string user = "user_" + std::to_string(i);
    if (canary_route(user, routes, 9) != canary_route(user, routes, 10)) ++moved;
  }
  CHECK(moved > 100);
}

TEST_CASE("canary_route validates its inputs") {
  CHECK_THROWS_AS(canary_route("u", {}, 0), std::invalid_argument);
  std::vector<RecRoute> zero = {{"http://a", 0.0}};
  CHECK_THROWS_AS(canary_route("u", zero, 0), std::invalid_argument);
  std::vector<RecRoute> neg = {{"http://a", -1.0}};
  CHECK_THROWS_AS(canary_route("u", neg, 0), std::invalid_argument);
}

TEST_CASE("validate_body filters unknown ids and preserves order") {
  RatingsCorpus corpus = fixture_corpus();
  RecClient client(&corpus.catalog);
  std::string first = corpus.catalog.movies[0].movie_id;
  std::string second = corpus.catalog.movies[1].movie_id;
  auto out = client.validate_body(
      second + ", bogus_one ," + first + ",bogus_two", 200, 12);
  CHECK(out.status_code == 200);
  CHECK(out.latency_ms == 12);
  CHECK(out.result == std::vector<std::string>{second, first});
  CHECK(out.filtered_ids == 2);
  CHECK(out.raw_length == 4);
}

TEST_CASE("validate_body caps the list and tolerates messy separators") {
  RatingsCorpus corpus = fixture_corpus();
  RecClient client(&corpus.catalog, 800, 3);
  std::string id = corpus.catalog.movies[0].movie_id;
  std::string body = id;
  for (int i = 0; i < 10; ++i) body += ",\n " + id;
  auto out = client.validate_body(body, 200, 0);
  CHECK(out.result.size() == 3);

  CHECK(client.validate_body("", 200, 0).result.empty());
  CHECK(client.validate_body(",,, ,", 200, 0).result.empty());
  CHECK(client.validate_body(id, 500, 0).result.empty());
}

TEST_CASE("live stub round trip over HTTP") {
  RatingsCorpus corpus = fixture_corpus();
  ScriptedRecommender::Options opts;
  opts.mode = ScriptedRecommender::Mode::random;
  opts.seed = 12;
  opts.top_k = 5;
  StubServer server(ScriptedRecommender(opts, corpus));
  REQUIRE(server.start(kStubPort));

  RecClient client(&corpus.catalog);
  auto out = client.request("http://127.0.0.1:" + std::to_string(kStubPort),
                            "u007");
  CHECK(out.status_code == 200);
  CHECK(out.result.size() == 5);
  CHECK(out.filtered_ids == 0);
  for (const auto& id : out.result) {
    CHECK(corpus.catalog.find(id) != nullptr);
  }

  // same user, same answer
  auto again = client.request("http://127.0.0.1:" + std::to_string(kStubPort),
                              "u007");
  CHECK(again.result == out.result);

  server.stop();
}

TEST_CASE("a dead endpoint reports status 0 without throwing") {
  RatingsCorpus corpus = fixture_corpus();
  RecClient client(&corpus.catalog, 200);
  auto out = client.request("http://127.0.0.1:1", "u1");  // nothing listens
  CHECK(out.status_code == 0);
  CHECK(out.result.empty());
}

TEST_CASE("builtin endpoints use the in-process handler with zero latency") {
  RatingsCorpus corpus = fixture_corpus();
  RecClient client(&corpus.catalog);
  std::string id = corpus.catalog.movies[0].movie_id;
  client.set_builtin_handler(
      [&](const std::string& endpoint, const std::string& user)
          -> std::optional<std::string> {
        CHECK(endpoint == "builtin:test");
        CHECK(user == "u3");
        return id + ",unknown_id";
      });
  auto out = client.request("builtin:test", "u3");
  CHECK(out.status_code == 200);
  CHECK(out.latency_ms == 0);
  CHECK(out.result == std::vector<std::string>{id});
  CHECK(out.filtered_ids == 1);

  client.set_builtin_handler(
      [](const std::string&, const std::string&) -> std::optional<std::string> {
        return std::nullopt;  // simulated failure
      });
  auto failed = client.request("builtin:test", "u3");
  CHECK(failed.status_code == 0);
  CHECK(failed.result.empty());
}

TEST_CASE("builtin endpoint without a handler is a programming error") {
  RatingsCorpus corpus = fixture_corpus();
  RecClient client(&corpus.catalog);
  CHECK_THROWS_AS(client.request("builtin:x", "u1"), std::logic_error);
}

TEST_CASE("client constructor validates arguments") {
  RatingsCorpus corpus = fixture_corpus();
  CHECK_THROWS_AS(RecClient(nullptr), std::invalid_argument);
  CHECK_THROWS_AS(RecClient(&corpus.catalog, 0), std::invalid_argument);
}
