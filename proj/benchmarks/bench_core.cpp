#include <benchmark/benchmark.h>

#include "flicksim/events.hpp"
#include "flicksim/log.hpp"
#include "flicksim/model.hpp"
#include "flicksim/rng.hpp"

namespace {

using namespace flicksim;

void BM_LogAppend(benchmark::State& state) {
  EventLog log;
  std::string line = "2025-01-05T20:11:00,u42,GET /data/m/m_inception_2010/13.mpg";
  for (auto _ : state) {
    benchmark::DoNotOptimize(log.append("events", line));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_LogAppend);

void BM_SerializeWatchV1(benchmark::State& state) {
  WatchEvent w{.ts = 7211, .user_id = "u42", .movie_id = "m_inception_2010", .minute = 13};
  Event e = w;
  for (auto _ : state) {
    benchmark::DoNotOptimize(serialize_event(e, kWireV1));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SerializeWatchV1);

void BM_SerializeWatchV2(benchmark::State& state) {
  WatchEvent w{.ts = 7211, .user_id = "u42", .movie_id = "m_inception_2010", .minute = 13};
  Event e = w;
  for (auto _ : state) {
    benchmark::DoNotOptimize(serialize_event(e, kWireV2));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SerializeWatchV2);

void BM_ParseWatchV1(benchmark::State& state) {
  std::string line = "2025-01-05T20:11:00,u42,GET /data/m/m_inception_2010/13.mpg";
  for (auto _ : state) {
    benchmark::DoNotOptimize(parse_event(line, kWireV1));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ParseWatchV1);

GroundTruthModel make_model(std::size_t users, std::size_t movies) {
  GroundTruthModel::Builder b;
  b.mu = 3.5;
  b.k = 8;
  Rng rng(11);
  for (std::size_t u = 0; u < users; ++u) {
    b.users.push_back("u" + std::to_string(u));
    b.user_bias.push_back(rng.normal(0, 0.2));
    for (int i = 0; i < b.k; ++i) b.user_factors.push_back(rng.normal(0, 0.3));
  }
  for (std::size_t m = 0; m < movies; ++m) {
    b.movies.push_back("m" + std::to_string(m));
    b.movie_bias.push_back(rng.normal(0, 0.2));
    for (int i = 0; i < b.k; ++i) b.movie_factors.push_back(rng.normal(0, 0.3));
  }
  return b.build();
}

void BM_Predict(benchmark::State& state) {
  GroundTruthModel model = make_model(1000, 500);
  Rng rng(3);
  for (auto _ : state) {
    std::string u = "u" + std::to_string(rng.uniform_index(1000));
    std::string m = "m" + std::to_string(rng.uniform_index(500));
    benchmark::DoNotOptimize(model.predict(u, m));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Predict);

void BM_RngSubstream(benchmark::State& state) {
  std::uint64_t i = 0;
  for (auto _ : state) {
    Rng r = substream(42, "select", i++, 17, 3);
    benchmark::DoNotOptimize(r.next_u64());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_RngSubstream);

}  // namespace

BENCHMARK_MAIN();
