#include <benchmark/benchmark.h>

#include "rarc/arc.hpp"
#include "rarc/baselines.hpp"
#include "rarc/problems.hpp"
#include "rarc/manifold.hpp"
#include "rarc/subsolver.hpp"

using namespace rarc;

namespace {

Instance instance(int which) {
  Rng rng(1);
  switch (which) {
    case 0: return make_invariant_subspace(128, 3, rng);
    case 1: return make_truncated_svd(60, 50, 3, rng);
    case 2: return make_matrix_completion(100, 100, 5, 4.0, rng);
    case 3: return make_maxcut(random_graph(200, 0.05, rng), 0, rng);
    case 4: return make_rotation_sync(20, 3, 0.3, 0.0, rng);
    default: return make_shapefit(50, 3, 0.3, rng);
  }
}

const char *kNames[] = {"invariant_subspace", "truncated_svd", "matrix_completion",
                        "maxcut", "rotation_sync", "shapefit"};

void BM_ArcLanczos(benchmark::State &state) {
  const Instance inst = instance(int(state.range(0)));
  state.SetLabel(kNames[state.range(0)]);
  for (auto _ : state) {
    benchmark::DoNotOptimize(arc_run(inst.manifold, inst.problem, inst.x0, ArcParams{}));
  }
}

void BM_ArcNlcg(benchmark::State &state) {
  const Instance inst = instance(int(state.range(0)));
  state.SetLabel(kNames[state.range(0)]);
  ArcParams p;
  p.subsolver = SubsolverKind::Nlcg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(arc_run(inst.manifold, inst.problem, inst.x0, p));
  }
}

void BM_Lanczos(benchmark::State &state) {
  const Eigen::Index n = state.range(0);
  Rng rng(3);
  Matrix h = randn(n, n, rng);
  h = 0.5 * (h + h.transpose()).eval();
  const Vector g = randn(n, 1, rng);
  const CubicModel m(std::make_shared<Euclidean>(n), Vector::Zero(n), 0.0, g,
                     [h](const Tangent &v) { return Matrix(h * v); }, 1.0);
  for (auto _ : state) {
    Rng r(4);
    benchmark::DoNotOptimize(solve_lanczos(m, SubsolverOptions{}, r));
  }
}

}  // namespace

BENCHMARK(BM_ArcLanczos)->DenseRange(0, 5)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ArcNlcg)->DenseRange(0, 5)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Lanczos)->RangeMultiplier(4)->Range(16, 1024)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
