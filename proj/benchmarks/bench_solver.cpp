#include <benchmark/benchmark.h>

#include "rsflow/background.hpp"
#include "rsflow/flow_solver.hpp"
#include "rsflow/geometry.hpp"

using namespace rsflow;

namespace {

RadialMetricState perturbed(std::size_t points) {
  return initial_state(RadialGrid(1.0, points), 3, 0.5);
}

void BM_Rhs(benchmark::State& st) {
  const auto s = perturbed(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(rhs(s, 2.0));
  st.SetComplexityN(st.range(0));
}
BENCHMARK(BM_Rhs)->RangeMultiplier(2)->Range(101, 1601)->Complexity();

void BM_Step(benchmark::State& st) {
  const BackgroundModel model{3, 0.5, 1.0};
  SchemeConfig scheme;
  FlowStepper stepper(model, RhoSpec::poly_saturating(0.1, 2), scheme);
  auto s = perturbed(static_cast<std::size_t>(st.range(0)));
  const double dt = stable_dt(s, scheme);
  for (auto _ : st) {
    s = stepper.step(s, dt);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_Step)->Arg(101)->Arg(401);

void BM_Curvature(benchmark::State& st) {
  const auto s = perturbed(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(curvature(s, 1.5));
}
BENCHMARK(BM_Curvature)->Arg(101)->Arg(401);

}  // namespace

BENCHMARK_MAIN();
