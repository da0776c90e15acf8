#include <benchmark/benchmark.h>

#include <map>

#include "mapreg/map_equation.hpp"
#include "mapreg/optimizer.hpp"
#include "mapreg/overlays.hpp"
#include "support/fixtures.hpp"

namespace {

using namespace mapreg;

// Planted blocks of 50 nodes, ~8 links per node.
Network bench_network(std::size_t nodes) {
  const std::size_t blocks = nodes / 50;
  return testing::planted_partition(std::vector<std::size_t>(blocks, 50), 3 * nodes, nodes, 4242);
}

const Network& network_for(const benchmark::State& state) {
  static std::map<std::int64_t, Network> cache;
  auto it = cache.find(state.range(0));
  if (it == cache.end()) it = cache.emplace(state.range(0), bench_network(state.range(0))).first;
  return it->second;
}

template <bool Parallel>
void BM_VisitRates(benchmark::State& state) {
  const FlowModel fm = build_flow_model(network_for(state), Method::global);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? visit_rates(fm) : serial::visit_rates(fm));
  }
}

template <bool Parallel>
void BM_CommonNeighbors(benchmark::State& state) {
  const Network& net = network_for(state);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? common_neighbors_overlay(net) : serial::common_neighbors_overlay(net));
  }
}

template <bool Parallel>
void BM_Mmt(benchmark::State& state) {
  const Network& net = network_for(state);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? mmt_overlay(net) : serial::mmt_overlay(net));
  }
}

template <bool Parallel>
void BM_Vmt(benchmark::State& state) {
  const Network& net = network_for(state);
  const FlowModel fm = build_flow_model(net, Method::standard);
  const auto p = fm.visit_rates();
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? vmt_overlay(net, p) : serial::vmt_overlay(net, p));
  }
}

template <bool Parallel>
void BM_Search(benchmark::State& state) {
  const FlowGraph g = make_flow_graph(build_flow_model(network_for(state), Method::global));
  SearchConfig config;
  config.trials = 16;
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? search(g, config) : serial::search(g, config));
  }
}

}  // namespace

#define MAPREG_BENCH_PAIR(name, ...)                                                       \
  BENCHMARK(name<false>)->Name(#name "/serial")->Unit(benchmark::kMillisecond)->UseRealTime() \
      __VA_ARGS__;                                                                         \
  BENCHMARK(name<true>)->Name(#name "/openmp")->Unit(benchmark::kMillisecond)->UseRealTime()  \
      __VA_ARGS__

MAPREG_BENCH_PAIR(BM_VisitRates, ->Arg(1000)->Arg(5000));
MAPREG_BENCH_PAIR(BM_CommonNeighbors, ->Arg(1000)->Arg(5000));
MAPREG_BENCH_PAIR(BM_Mmt, ->Arg(1000)->Arg(5000));
MAPREG_BENCH_PAIR(BM_Vmt, ->Arg(1000)->Arg(5000));
MAPREG_BENCH_PAIR(BM_Search, ->Arg(500)->Arg(1000));

BENCHMARK_MAIN();
