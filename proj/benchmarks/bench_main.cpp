#include <benchmark/benchmark.h>

#include <map>
#include <random>

#include "semmatch/matcher.hpp"
#include "semmatch/online_viterbi.hpp"
#include "semmatch/path_finder.hpp"
#include "semmatch/preprocess.hpp"
#include "semmatch/sim.hpp"

namespace {

using namespace semmatch;

const RoadNetwork& grid(int side) {
  static std::map<int, RoadNetwork> cache;
  auto it = cache.find(side);
  if (it == cache.end()) {
    sim::GridSpec g;
    g.rows = side;
    g.cols = side;
    g.density_per_km = 4.0;
    g.seed = 3;
    it = cache.emplace(side, sim::generate_network(g)).first;
  }
  return it->second;
}

void BM_QueryRadius(benchmark::State& state) {
  const RoadNetwork& net = grid(static_cast<int>(state.range(0)));
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<StateId> pick(0, static_cast<StateId>(net.states().size() - 1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(net.query_radius(net.state(pick(rng)).loc, 1500.0));
  }
}
BENCHMARK(BM_QueryRadius)->Arg(6)->Arg(20);

void BM_RouteBudgeted(benchmark::State& state) {
  const RoadNetwork& net = grid(12);
  PathFinder paths(net, static_cast<std::size_t>(state.range(0)));
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<StateId> pick(0, static_cast<StateId>(net.states().size() - 1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(paths.route(pick(rng), pick(rng), 3000.0));
  }
}
BENCHMARK(BM_RouteBudgeted)->Arg(1)->Arg(4096);

void BM_ViterbiExtend(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10.0, 0.0);
  LogMatrix m(n, n, 0.0);
  for (auto& v : m.values) v = u(rng);
  std::vector<double> obs(n);
  for (auto& v : obs) v = u(rng);
  OnlineViterbi v(20);
  v.start(obs, obs);
  for (auto _ : state) {
    benchmark::DoNotOptimize(v.extend(m, obs));
  }
}
BENCHMARK(BM_ViterbiExtend)->Arg(8)->Arg(64);

void BM_MatchDrive(benchmark::State& state) {
  const RoadNetwork& net = grid(6);
  const auto detect = ConfusionMatrix::from_counts(default_confusion_counts(), 0.0);
  const auto model = ConfusionMatrix::standard();
  sim::RouteSpec route;
  route.length_km = 10.0;
  const auto st = sim::simulate_trace(net, detect, sim::NoiseModel::preset("cellular"), route, 4);
  HmmConfig cfg;
  cfg.err_scale = 3.0;
  cfg.window = 20;
  cfg.max_speed_mps = 25.0;
  for (auto _ : state) {
    Matcher m(net, model, cfg);
    for (const auto& e : st.events.events) m.step(e.event);
    benchmark::DoNotOptimize(m.finish());
  }
  state.counters["events"] = static_cast<double>(st.events.events.size());
}
BENCHMARK(BM_MatchDrive)->Unit(benchmark::kMillisecond);

void BM_TrimmedMean(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 0.001);
  std::vector<CleanFix> s(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i].t = static_cast<double>(i);
    s[i].loc = {30.0 + 1e-4 * static_cast<double>(i) + n(rng), 31.0 + n(rng)};
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(trimmed_mean_filter(s, 0.2, 5));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrimmedMean)->Arg(1000)->Arg(10000);

}  // namespace
BENCHMARK_MAIN();
