#include <benchmark/benchmark.h>

#include <random>

#include "td/cartan.hpp"
#include "td/patterson.hpp"
#include "td/presets.hpp"
#include "td/series.hpp"

using namespace td;

namespace {

Matrix random_sl3(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    Matrix m(3, 3);
    for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = n(rng);
    const double det = m.determinant();
    if (det > 1e-3) return m / std::cbrt(det);
  }
}

const LinearFunctional kOmega1 = LinearFunctional::fundamental_weight(2, 1);

void BM_CartanProject(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const GroupElement g(random_sl3(rng));
  for (auto _ : state) benchmark::DoNotOptimize(cartan_project(g));
}
BENCHMARK(BM_CartanProject);

void BM_IwasawaCocycle(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const GroupElement g(random_sl3(rng));
  const PartialFlag f(RootSubset::full(3), random_sl3(rng));
  for (auto _ : state) benchmark::DoNotOptimize(iwasawa_cocycle(g, f));
}
BENCHMARK(BM_IwasawaCocycle);

void BM_GromovProduct(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const PartialFlag f(RootSubset::full(3), random_sl3(rng)), g(RootSubset::full(3), random_sl3(rng));
  for (auto _ : state) benchmark::DoNotOptimize(gromov_product(f, g));
}
BENCHMARK(BM_GromovProduct);

void BM_EnumerateBall(benchmark::State& state) {
  const auto p = make_preset(state.range(1) ? "surface2" : "schottky");
  const int radius = static_cast<int>(state.range(0));
  std::size_t size = 0;
  for (auto _ : state) size = enumerate_ball(p, radius).size();
  state.counters["elements"] = static_cast<double>(size);
}
BENCHMARK(BM_EnumerateBall)->Args({8, 0})->Args({10, 0})->Args({4, 1})->Unit(benchmark::kMillisecond);

void BM_BallCartan(benchmark::State& state) {
  const auto ball = enumerate_ball(make_preset("schottky"), static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ball_cartan(ball));
}
BENCHMARK(BM_BallCartan)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_CriticalExponent(benchmark::State& state) {
  const auto ball = enumerate_ball(make_preset("schottky"), static_cast<int>(state.range(0)));
  const Matrix k = ball_cartan(ball);
  for (auto _ : state) benchmark::DoNotOptimize(critical_exponent(ball, k, kOmega1));
}
BENCHMARK(BM_CriticalExponent)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_ShellFlagMeasure(benchmark::State& state) {
  const auto p = make_preset("schottky");
  const auto ball = enumerate_ball(p, static_cast<int>(state.range(0)));
  const Matrix k = ball_cartan(ball);
  for (auto _ : state) {
    benchmark::DoNotOptimize(flag_pushforward(shell(patterson_measure(ball, k, kOmega1, 0.96), ball.radius()), p.theta));
  }
}
BENCHMARK(BM_ShellFlagMeasure)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_ConformalityCheck(benchmark::State& state) {
  const auto p = make_preset("schottky");
  const auto ball = enumerate_ball(p, 8);
  const auto mu = flag_pushforward(shell(patterson_measure(ball, kOmega1, 0.96), 8), p.theta);
  const auto cells = sphere_cells(ball, 2, p.theta);
  for (auto _ : state) benchmark::DoNotOptimize(conformality_check(mu, p.generators[0], cells));
}
BENCHMARK(BM_ConformalityCheck)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
