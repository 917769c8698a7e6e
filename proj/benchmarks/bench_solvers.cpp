#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "eldiff/model.hpp"
#include "eldiff/npns.hpp"
#include "eldiff/quasineutral.hpp"
#include "eldiff/spectral.hpp"

using namespace eldiff;

namespace {

ScalarField wave(const GridPtr& g, double offset, double amp, int kx, int ky) {
  std::vector<double> v(g->size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    auto x = g->coordinates(i);
    v[i] = offset + amp * std::cos(kx * x[0]) * std::cos(ky * x[1]);
  }
  return ScalarField::from_physical(g, std::move(v));
}

struct Setup {
  GridPtr g;
  ScalarField doping;
  LimitState limit;
  Params params;
};

Setup setup(int n, double lambda) {
  Setup s;
  s.g = make_grid(2, n);
  s.doping = wave(s.g, 0.0, 0.1, 1, 0) + wave(s.g, 0.0, 0.1, 0, 1);
  s.limit.z = wave(s.g, 2.0, 0.2, 1, 1);
  s.limit.v = leray_project(VectorField({wave(s.g, 0.0, 0.05, 0, 1), wave(s.g, 0.0, 0.05, 1, 0)}));
  s.params.lambda = lambda;
  return s;
}

void BM_Transform(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto g = make_grid(2, n);
  auto f = wave(g, 1.0, 0.5, 3, 2);
  for (auto _ : state) {
    auto c = ScalarField::from_spectral(g, std::vector<cplx>(f.coeffs().begin(), f.coeffs().end()));
    benchmark::DoNotOptimize(c.values().data());
  }
}
BENCHMARK(BM_Transform)->Arg(32)->Arg(64)->Arg(128);

void BM_DealiasedProduct(benchmark::State& state) {
  auto g = make_grid(2, static_cast<int>(state.range(0)));
  auto a = wave(g, 1.0, 0.5, 3, 2);
  auto b = wave(g, 0.0, 0.5, 1, 4);
  for (auto _ : state) benchmark::DoNotOptimize(multiply(a, b));
}
BENCHMARK(BM_DealiasedProduct)->Arg(64);

void BM_Poisson(benchmark::State& state) {
  auto s = setup(static_cast<int>(state.range(0)), 0.1);
  auto init = well_prepared_initial(s.limit, s.doping, s.params);
  for (auto _ : state) benchmark::DoNotOptimize(solve_poisson(init.n, init.p, s.doping, 0.1));
}
BENCHMARK(BM_Poisson)->Arg(64);

void BM_LimitElliptic(benchmark::State& state) {
  auto s = setup(static_cast<int>(state.range(0)), 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(solve_limit_potential(s.limit.z, s.doping, s.limit.v));
}
BENCHMARK(BM_LimitElliptic)->Arg(32)->Arg(64);

void BM_NpnsStep(benchmark::State& state) {
  auto s = setup(static_cast<int>(state.range(0)), 0.1);
  auto prev = well_prepared_initial(s.limit, s.doping, s.params);
  auto curr = step_imex_euler(prev, 1e-3, s.doping, s.params);
  for (auto _ : state) benchmark::DoNotOptimize(step_sbdf(prev, curr, 1e-3, s.doping, s.params));
}
BENCHMARK(BM_NpnsStep)->Arg(64);

void BM_LimitStep(benchmark::State& state) {
  auto s = setup(static_cast<int>(state.range(0)), 0.0);
  auto curr = step_imex_euler_limit(s.limit, 1e-3, s.doping, s.params);
  for (auto _ : state) benchmark::DoNotOptimize(step_sbdf_limit(s.limit, curr, 1e-3, s.doping, s.params));
}
BENCHMARK(BM_LimitStep)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
