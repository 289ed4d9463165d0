#include "polyproj/accel_distance.hpp"
#include "polyproj/accel_nearest.hpp"
#include "polyproj/generators.hpp"

#include <benchmark/benchmark.h>

#include <string>

using namespace polyproj;

namespace {

const std::string kSolvers[] = {"qp", "wolfe", "mdm"};

// range(0): d, range(1): l, range(2): solver, range(3): accelerated
void BM_Nearest(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto l = static_cast<std::size_t>(state.range(1));
  const auto inst = gen_compressed_cube(d, l, derive_seed(1, d, l, 0));
  ProjectOptions o;
  o.solver = kSolvers[state.range(2)];
  o.accelerated = state.range(3) != 0;
  std::size_t outer = 0;
  for (auto _ : state) {
    const auto r = project(inst.z, inst.cloud_p, o);
    benchmark::DoNotOptimize(r.projection.data());
    outer = r.outer_iterations;
  }
  state.counters["outer"] = static_cast<double>(outer);
  state.SetLabel(o.solver + (o.accelerated ? " accel" : " plain"));
}

void BM_Distance(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto l = static_cast<std::size_t>(state.range(1));
  const auto inst = gen_two_cubes(d, l, derive_seed(1, d, l, 0));
  DistanceOptions o;
  o.accelerated = state.range(2) != 0;
  for (auto _ : state) {
    const auto r = distance(inst.cloud_p, *inst.cloud_q, o);
    benchmark::DoNotOptimize(r.distance);
  }
  state.SetLabel(o.accelerated ? "accel" : "plain");
}

}  // namespace

BENCHMARK(BM_Nearest)
    ->ArgsProduct({{3}, {500, 2000, 5000}, {0}, {0, 1}})
    ->ArgsProduct({{3, 10}, {500, 2000}, {1, 2}, {0, 1}})
    ->Unit(benchmark::kMillisecond);

BENCHMARK(BM_Distance)->ArgsProduct({{3}, {100, 300}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
