#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "vpdecay/diagnostics.hpp"
#include "vpdecay/field.hpp"
#include "vpdecay/initial_data.hpp"

using namespace vpdecay;

namespace {

SourceSet cloud(std::size_t n, bool neutral) {
  std::mt19937_64 rng(n);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Vec3> x(n);
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = {g(rng), g(rng), g(rng)};
    q[i] = (neutral && i % 2) ? -1.0 : 1.0;
  }
  SourceSet s;
  s.add_block(x, q);
  return s;
}

void BM_DirectField(benchmark::State& st) {
  const SourceSet s = cloud(st.range(0), true);
  for (auto _ : st) benchmark::DoNotOptimize(direct_field(s, s.positions, 0.01));
  st.SetComplexityN(st.range(0));
}
BENCHMARK(BM_DirectField)->Arg(2500)->Arg(5000)->Arg(10000)->Unit(benchmark::kMillisecond)->Complexity();

// doubling N should cost less than 2.6x
void BM_TreeField(benchmark::State& st) {
  const SourceSet s = cloud(st.range(0), true);
  for (auto _ : st) benchmark::DoNotOptimize(tree_field(s, s.positions, 0.01, 0.5));
  st.SetComplexityN(st.range(0));
}
BENCHMARK(BM_TreeField)->Arg(10000)->Arg(25000)->Arg(50000)->Arg(100000)->Unit(benchmark::kMillisecond)->Complexity(benchmark::oNLogN);

void BM_TreeFieldTheta(benchmark::State& st) {
  const SourceSet s = cloud(20000, true);
  const double theta = st.range(0) / 10.0;
  for (auto _ : st) benchmark::DoNotOptimize(tree_field(s, s.positions, 0.01, theta));
}
BENCHMARK(BM_TreeFieldTheta)->DenseRange(3, 9, 2)->Unit(benchmark::kMillisecond);

void BM_Construct(benchmark::State& st) {
  const InitialDataSpec spec = InitialDataSpec::for_order(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(construct_ensemble(spec));
}
BENCHMARK(BM_Construct)->Arg(0)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_KernelDensity(benchmark::State& st) {
  const Snapshot s = Snapshot::from_g_frame(10.0, construct_ensemble(InitialDataSpec::for_order(1)));
  const Grid3 g = Grid3::cube(-15.0, 15.0, static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(density(s, g, 2.5 * g.axes[0].spacing()));
}
BENCHMARK(BM_KernelDensity)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_OracleDensity(benchmark::State& st) {
  const InitialData d = build_initial_data(InitialDataSpec::for_order(1));
  const int n = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(free_stream_density(d, 20.0, free_stream_grid(d, 20.0, n)));
}
BENCHMARK(BM_OracleDensity)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
