#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "geoscope/chart.hpp"
#include "geoscope/extension.hpp"
#include "geoscope/geometry.hpp"
#include "geoscope/jet.hpp"
#include "geoscope/stabilization.hpp"
#include "geoscope/weyl.hpp"

using namespace geoscope;

namespace {

Chart model(const char* name) { return Chart::load(std::string(GEOSCOPE_CHART_DIR) + "/" + name + ".chart"); }

const std::vector<double>& point_for(int dim) {
  static const std::vector<double> p2 = {0.9, 0.3}, p3 = {0.9, 1.1, 0.3};
  return dim == 2 ? p2 : p3;
}

}  // namespace

static void BM_JetMultiply(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const int order = static_cast<int>(state.range(1));
  Jet a = Jet::variable(0, 0.3, dim, order), b = Jet::variable(dim - 1, 0.7, dim, order);
  a = exp(a) + b;
  b = sin(b) * a;
  for (auto _ : state) benchmark::DoNotOptimize(a * b);
  state.SetLabel(std::to_string(JetLayout::get(dim, order).size()) + " coefficients");
}
BENCHMARK(BM_JetMultiply)->Args({2, 4})->Args({2, 8})->Args({3, 4})->Args({3, 6})->Args({4, 6});

static void BM_CurvatureTower(benchmark::State& state) {
  const Chart c = model(state.range(0) == 2 ? "bump" : "sphere3");
  const int depth = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(curvature_tower(c, point_for(c.dim()), depth));
}
BENCHMARK(BM_CurvatureTower)->Args({2, 1})->Args({2, 3})->Args({2, 5})->Args({3, 1})->Args({3, 3})
    ->Unit(benchmark::kMicrosecond);

static void BM_InvariantGradients(benchmark::State& state) {
  const Chart c = model("bump");
  const InvariantSet set = enumerate_patterns(2, default_max_order(2));
  for (auto _ : state) benchmark::DoNotOptimize(invariant_gradients(set, c, point_for(2)));
}
BENCHMARK(BM_InvariantGradients)->Unit(benchmark::kMicrosecond);

static void BM_Stabilize(benchmark::State& state) {
  const char* names[] = {"euclid2", "bump", "sphere3"};
  const Chart c = model(names[state.range(0)]);
  for (auto _ : state) benchmark::DoNotOptimize(stabilize(c, point_for(c.dim())));
  state.SetLabel(names[state.range(0)]);
}
BENCHMARK(BM_Stabilize)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

static void BM_ExtendKilling(benchmark::State& state) {
  const Chart c = model("bump");
  const std::vector<double> base = {0.0, 0.0};
  const StabilizationReport r = stabilize(c, base);
  const int count = static_cast<int>(state.range(0));
  const Grid grid{{{-1, 1, count}, {-1, 1, count}}};
  for (auto _ : state) benchmark::DoNotOptimize(extend_killing(c, Eigen::Vector2d(0, 0), r.stable_basis[0], grid, 50));
}
BENCHMARK(BM_ExtendKilling)->Arg(5)->Arg(9)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
