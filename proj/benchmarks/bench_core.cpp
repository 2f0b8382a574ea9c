#include <benchmark/benchmark.h>

#include <random>

#include "fasec/bcd.hpp"
#include "fasec/geometry.hpp"
#include "fasec/hybrid.hpp"
#include "fasec/linalg.hpp"
#include "fasec/port_selection.hpp"

namespace {

using namespace fasec;

struct Problem {
  MatrixXcd hb, he;
};

Problem small_problem(int ports) {
  ScenarioGeometry g;
  g.num_ports = ports;
  g.num_active = std::min(16, ports);
  g.finalize();
  const ChannelPair c = synthesize_channels(g, ChannelModel::fresnel);
  return {c.bob, c.eve};
}

void BM_Waterfill(benchmark::State& state) {
  const int ports = static_cast<int>(state.range(0));
  const Problem p = small_problem(ports);
  std::mt19937_64 rng(1);
  auto [W, v] = random_initial_state(ports, 4, 0.01, true, rng);
  const CurvatureSystem c = build_curvature(p.hb, p.he, update_auxiliaries(p.hb, p.he, W, v));
  for (auto _ : state) benchmark::DoNotOptimize(waterfill(c, 0.01).lambda);
}
BENCHMARK(BM_Waterfill)->Arg(16)->Arg(64)->Arg(128);

void BM_Bcd(benchmark::State& state) {
  const int ports = static_cast<int>(state.range(0));
  const Problem p = small_problem(ports);
  BcdOptions o;
  o.max_iters = 30;
  for (auto _ : state) {
    std::mt19937_64 rng(2);
    auto [W, v] = random_initial_state(ports, 4, 0.01, true, rng);
    benchmark::DoNotOptimize(bcd_optimize(p.hb, p.he, 0.01, W, v, o).objective_bits);
  }
}
BENCHMARK(BM_Bcd)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_FitHybrid(benchmark::State& state) {
  const int ports = static_cast<int>(state.range(0));
  std::mt19937_64 rng(3);
  const MatrixXcd target = linalg::complex_gaussian(ports, 5, rng);
  for (auto _ : state) benchmark::DoNotOptimize(fit_hybrid(target, 8, 1.0).fit_residual);
}
BENCHMARK(BM_FitHybrid)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_SelectPorts(benchmark::State& state) {
  ScenarioGeometry g;
  g.finalize();
  const ChannelPair c = synthesize_channels(g, ChannelModel::fresnel);
  SelectorOptions o;
  o.final_iters = 30;
  for (auto _ : state) {
    benchmark::DoNotOptimize(select_ports(c, g.num_active, g.streams, 0.01, o).support.size());
  }
}
BENCHMARK(BM_SelectPorts)->Unit(benchmark::kMillisecond);

}  // namespace
