#include <benchmark/benchmark.h>

#include <cmath>

#include "bvpdisc/bvpdisc.hpp"

using namespace bvpdisc;

namespace {

const Grid& grid() {
  static const Grid g(0.0, 10.0, 500);
  return g;
}

DifferentiationConfig clean_diff() {
  DifferentiationConfig d;
  d.method = DifferentiationMethod::PolyInterp;
  d.window = 7;
  d.degree = 6;
  return d;
}

const TrialSet& linear_trials(std::size_t m) {
  static std::map<std::size_t, TrialSet> cache;
  auto it = cache.find(m);
  if (it == cache.end()) {
    const auto model = make_model(ModelKind::LinearSturmLiouville);
    it = cache.emplace(m, generate_trials(model, forcing_set(model, m, 1), grid())).first;
  }
  return it->second;
}

void BM_ShootLinear(benchmark::State& state) {
  const auto model = make_model(ModelKind::LinearSturmLiouville);
  const ForcingSpec f{2.0, 1.5, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(shoot(model, f, grid()));
}
BENCHMARK(BM_ShootLinear)->Unit(benchmark::kMillisecond);

void BM_ShootNonlinear(benchmark::State& state) {
  const auto model = make_model(ModelKind::NonlinearSturmLiouville);
  const ForcingSpec f{3.0, 2.5, 2.0};
  for (auto _ : state) benchmark::DoNotOptimize(shoot(model, f, grid()));
}
BENCHMARK(BM_ShootNonlinear)->Unit(benchmark::kMillisecond);

void BM_ShootBeam(benchmark::State& state) {
  const auto model = make_model(ModelKind::EulerBernoulli);
  const ForcingSpec f{1.0, 1.5, 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(shoot(model, f, grid()));
}
BENCHMARK(BM_ShootBeam)->Unit(benchmark::kMillisecond);

void BM_PolyInterp(benchmark::State& state) {
  std::vector<double> u;
  for (double x : grid().points()) u.push_back(std::sin(x));
  DifferentiationConfig d;
  d.method = DifferentiationMethod::PolyInterp;
  d.window = static_cast<std::size_t>(state.range(0));
  d.degree = 4;
  for (auto _ : state) benchmark::DoNotOptimize(poly_interp_derivative(u, grid(), 2, d));
}
BENCHMARK(BM_PolyInterp)->Arg(15)->Arg(61)->Unit(benchmark::kMicrosecond);

void BM_AssembleNormalize(benchmark::State& state) {
  const auto& set = linear_trials(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(normalize(assemble_system(set, 2, clean_diff())));
}
BENCHMARK(BM_AssembleNormalize)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_ToleranceSweep(benchmark::State& state) {
  const auto lib =
      normalize(assemble_system(linear_trials(static_cast<std::size_t>(state.range(0))), 2, clean_diff()));
  for (auto _ : state) benchmark::DoNotOptimize(select_model(tolerance_sweep(lib)));
}
BENCHMARK(BM_ToleranceSweep)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_KnownOperatorFit(benchmark::State& state) {
  const auto lib = normalize(assemble_system(linear_trials(6), 2, clean_diff()));
  const auto truth = make_model(ModelKind::LinearSturmLiouville).true_terms;
  for (auto _ : state) benchmark::DoNotOptimize(known_operator_fit(lib, truth));
}
BENCHMARK(BM_KnownOperatorFit)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
