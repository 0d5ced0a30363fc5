#include <benchmark/benchmark.h>

#include <random>

#include "hypodiff/density.hpp"
#include "hypodiff/kde.hpp"
#include "hypodiff/kernel.hpp"
#include "hypodiff/matrix_exponential.hpp"
#include "hypodiff/model.hpp"
#include "hypodiff/simulate.hpp"

using namespace hypodiff;

namespace {

Matrix chain(int d) {
  Matrix B = Matrix::Zero(d, d);
  for (int i = 1; i < d; ++i) B(i, i - 1) = 1.0;
  return B;
}

void BM_MatExpNilpotent(benchmark::State& state) {
  const Matrix B = chain(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mat_exp(B, 0.7));
}
BENCHMARK(BM_MatExpNilpotent)->Arg(2)->Arg(3)->Arg(6);

void BM_MatExpGeneral(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  Matrix B = chain(d);
  B(0, 0) = -0.5;
  B(0, d - 1) = 0.3;
  for (auto _ : state) benchmark::DoNotOptimize(mat_exp(B, 0.7));
}
BENCHMARK(BM_MatExpGeneral)->Arg(3)->Arg(6);

void BM_Covariance(benchmark::State& state) {
  const GaussianKernelParams p(chain(static_cast<int>(state.range(0))), 1, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(covariance(0.5, p));
}
BENCHMARK(BM_Covariance)->Arg(2)->Arg(3);

void BM_GaussEval(benchmark::State& state) {
  const GaussianKernelParams p(chain(2), 1, 1.0);
  Vector x(2), xi(2);
  x << 0.1, 0.2;
  xi << 0.3, 0.1;
  for (auto _ : state) benchmark::DoNotOptimize(gauss_eval(0.0, x, 0.5, xi, p));
}
BENCHMARK(BM_GaussEval);

void BM_FrozenGaussian(benchmark::State& state) {
  const FrozenGaussian g(GaussianKernelParams(chain(2), 1, 1.0), 0.5);
  Vector x(2), xi(2);
  x << 0.1, 0.2;
  xi << 0.3, 0.1;
  for (auto _ : state) benchmark::DoNotOptimize(g.density(x, xi));
}
BENCHMARK(BM_FrozenGaussian);

void BM_EulerSteps(benchmark::State& state) {
  const ModelSpec m = make_builtin(state.range(0) == 0 ? "kolmogorov2" : "asian");
  Vector x(2);
  x << 1.0, 0.0;
  SimulationOptions o;
  o.dt = 1e-3;
  o.n_paths = 2000;
  o.threads = 1;
  for (auto _ : state) {
    double acc = 0.0;
    for_each_path(m, 0.0, x, 0.1, o,
                  [&](std::size_t, const PathView& v) { acc += v.final_state()(0); });
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * 2000 * 100);
}
BENCHMARK(BM_EulerSteps)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Kde(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  std::vector<Vector> samples(static_cast<std::size_t>(state.range(0)));
  for (auto& s : samples) {
    s.resize(2);
    s << z(rng), z(rng);
  }
  const auto nodes = rectangular_grid(Vector::Constant(2, -2.0), Vector::Constant(2, 2.0), {9, 9});
  const Matrix W = Matrix::Identity(2, 2) * 10.0;
  for (auto _ : state)
    benchmark::DoNotOptimize(gaussian_kde(samples, samples.size(), nodes, W, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 81);
}
BENCHMARK(BM_Kde)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
