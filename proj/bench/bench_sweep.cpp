// Serial vs OpenMP grid sweeps on the hyperbolic grid used by the CLI.

#include "modelspace/disc.hpp"
#include "modelspace/grid_sweep.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

using namespace modelspace;

namespace {

std::vector<BlaschkeProduct> family(int count) {
  std::vector<BlaschkeProduct> out;
  for (int n = 0; n < count; ++n) {
    std::vector<BlaschkeZero> zeros;
    for (int k = 0; k < 3; ++k) {
      const double r = 0.3 + 0.6 * std::fmod(0.37 * (n + 1) * (k + 2), 1.0);
      zeros.push_back({DiscPoint(std::polar(r, 2.1 * n + 1.3 * k)), 1 + (n + k) % 2});
    }
    out.emplace_back(std::move(zeros));
  }
  return out;
}

sweep::Execution mode(const benchmark::State& state) {
  return state.range(1) == 0 ? sweep::Execution::serial : sweep::Execution::parallel;
}

void BM_LeaveOneOut(benchmark::State& state) {
  const auto f = family(8);
  const auto pts = DiscGrid::hyperbolic(static_cast<int>(state.range(0)), 8).points();
  for (auto _ : state) benchmark::DoNotOptimize(sweep::min_leave_one_out_log(f, pts, mode(state)));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * pts.size()));
}

void BM_DefectSum(benchmark::State& state) {
  const auto f = family(8);
  const auto pts = DiscGrid::hyperbolic(static_cast<int>(state.range(0)), 8).points();
  for (auto _ : state) benchmark::DoNotOptimize(sweep::max_defect_sum(f, pts, mode(state)));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * pts.size()));
}

void BM_KernelLineSum(benchmark::State& state) {
  std::vector<DiscPoint> nodes;
  for (int j = 0; j < 64; ++j) nodes.emplace_back(std::polar(1.0 - std::ldexp(1.0, -(j % 8) - 1), 0.7 * j));
  const auto pts = DiscGrid::hyperbolic(static_cast<int>(state.range(0)), 8).points();
  for (auto _ : state) benchmark::DoNotOptimize(sweep::max_kernel_line_sum(nodes, pts, mode(state)));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * pts.size()));
}

}  // namespace

// args: grid levels K, execution (0 serial, 1 parallel)
BENCHMARK(BM_LeaveOneOut)->ArgsProduct({{8, 10}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DefectSum)->ArgsProduct({{8, 10}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KernelLineSum)->ArgsProduct({{8, 10}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
