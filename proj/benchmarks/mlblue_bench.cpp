// Copyright 2026 The mlblue Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "mlblue/allocation.hpp"
#include "mlblue/blue.hpp"
#include "mlblue/extrapolation.hpp"
#include "mlblue/groups.hpp"
#include "mlblue/model_family.hpp"
#include "mlblue/rng.hpp"
#include "mlblue/simulation.hpp"

namespace mlblue {
namespace {

const CostModel kToyCost = CostModel::geometric(0.25, 2);

void BM_Philox(benchmark::State& state) {
  PhiloxCounter ctr{0, 0, 0, 0};
  for (auto _ : state) {
    ctr = philox4x32(ctr, {1, 2});
    benchmark::DoNotOptimize(ctr);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Philox);

void BM_GaussianStream(benchmark::State& state) {
  std::uint32_t a = 0;
  for (auto _ : state) {
    GaussianStream s(StreamId{7, kDomainSimulation, a++, 0, 0});
    double acc = 0;
    for (int i = 0; i < 64; ++i) acc += s.next();
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(64 * state.iterations());
}
BENCHMARK(BM_GaussianStream);

void BM_GroupCovariance(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  const MomentData md = family_moments(ExpansionFamily::toy(2, L));
  const GroupSystem s = enumerate_groups(L, L, kToyCost);
  for (auto _ : state) {
    GroupCovariance gc(s, md.C);
    benchmark::DoNotOptimize(gc.size());
  }
  state.SetLabel(std::to_string(s.size()) + " groups");
}
BENCHMARK(BM_GroupCovariance)->Arg(4)->Arg(6)->Arg(8);

void BM_PsiAssembly(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  const MomentData md = family_moments(ExpansionFamily::toy(2, L));
  const GroupCovariance gc(enumerate_groups(L, L, kToyCost), md.C);
  std::vector<double> m(gc.size(), 1.0);
  for (auto _ : state) {
    Matrix psi = gc.psi(std::span<const double>(m));
    benchmark::DoNotOptimize(psi.data());
  }
}
BENCHMARK(BM_PsiAssembly)->Arg(4)->Arg(6)->Arg(8);

void BM_SaobAllocate(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  const int q = static_cast<int>(state.range(1));
  const MomentData md = family_moments(ExpansionFamily::toy(2, L));
  const GroupCovariance gc(enumerate_groups(L, q, kToyCost), md.C);
  const Vector alpha = unit_vector(L, L);
  for (auto _ : state) {
    SaobResult r = saob_allocate(gc, alpha, 100);
    benchmark::DoNotOptimize(r.variance);
  }
}
BENCHMARK(BM_SaobAllocate)->Args({4, 2})->Args({4, 4})->Args({6, 3})->Args({8, 3})
    ->Unit(benchmark::kMillisecond);

void BM_ClosedForm(benchmark::State& state) {
  const MomentData md = family_moments(ExpansionFamily::toy(0, 10));
  const EstimatorScheme ml = mlmc_scheme(10, {}, kToyCost);
  for (auto _ : state) {
    EstimatorScheme s = allocate_scheme(ml, md.C, 100);
    benchmark::DoNotOptimize(s.m.data());
  }
}
BENCHMARK(BM_ClosedForm);

void BM_ReVectors(benchmark::State& state) {
  const RateVector rates({0, 1, 2, 3});
  for (auto _ : state) {
    RECoefficients v = re_vectors(static_cast<int>(state.range(0)), rates, 4);
    benchmark::DoNotOptimize(v.v.data());
  }
}
BENCHMARK(BM_ReVectors)->Arg(8)->Arg(16);

void BM_Replications(benchmark::State& state) {
  const ExpansionFamily f = ExpansionFamily::toy(0);
  const EstimatorScheme ml = mlmc_scheme(4, {16, 4, 2, 1}, kToyCost);
  std::uint64_t seed = 1;
  for (auto _ : state) {
    auto est = replicate_estimates(ml, f, seed++, 1000);
    benchmark::DoNotOptimize(est.data());
  }
  state.SetItemsProcessed(1000 * state.iterations());
}
BENCHMARK(BM_Replications)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace mlblue

BENCHMARK_MAIN();
