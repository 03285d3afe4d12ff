#include <benchmark/benchmark.h>

#include <numbers>

#include "szego/fourier.hpp"
#include "szego/kernels.hpp"
#include "szego/spectral.hpp"

using namespace szego;
using std::numbers::pi;

namespace {

RegionSpec unit_interval(Mode m) { return RegionSpec({CompositeSet::interval(0, 1)}, m); }

StepSymbol half_filling() { return StepSymbol({StepSymbol1D::indicator(CompositeSet::interval(-pi / 2, pi / 2))}); }

void BM_AssembleLattice(benchmark::State& st) {
  const double lambda = double(st.range(0));
  for (auto _ : st) {
    auto op = assemble(unit_interval(Mode::lattice), half_filling(), lambda, Mode::lattice);
    benchmark::DoNotOptimize(op.matrix().re.data());
  }
  st.SetComplexityN(st.range(0));
}
BENCHMARK(BM_AssembleLattice)->RangeMultiplier(2)->Range(128, 2048)->Unit(benchmark::kMillisecond);

void BM_AssembleNystrom(benchmark::State& st) {
  const StepSymbol gamma({StepSymbol1D::indicator(CompositeSet::interval(-1, 1))});
  const double lambda = double(st.range(0));
  for (auto _ : st) {
    auto op = assemble(unit_interval(Mode::continuum), gamma, lambda, Mode::continuum);
    benchmark::DoNotOptimize(op.matrix().re.data());
  }
}
BENCHMARK(BM_AssembleNystrom)->RangeMultiplier(2)->Range(16, 256)->Unit(benchmark::kMillisecond);

void BM_Eigenvalues(benchmark::State& st) {
  const auto op = assemble(unit_interval(Mode::lattice), half_filling(), double(st.range(0)), Mode::lattice);
  for (auto _ : st) {
    auto s = eigenvalues(op, EigenRoute::dense);
    benchmark::DoNotOptimize(s.eigenvalues.data());
  }
}
BENCHMARK(BM_Eigenvalues)->RangeMultiplier(2)->Range(128, 2048)->Unit(benchmark::kMillisecond);

void BM_ProductFactors(benchmark::State& st) {
  AssembleOptions opt;
  opt.dense = false;
  const RegionSpec omega = RegionSpec::cube(2, 0, 1);
  const StepSymbol gamma = StepSymbol::indicator(RegionSpec::cube(2, -1, 1));
  for (auto _ : st) {
    auto op = assemble(omega, gamma, double(st.range(0)), Mode::continuum, opt);
    auto s = eigenvalues(op, EigenRoute::factors);
    benchmark::DoNotOptimize(entropy(s));
  }
}
BENCHMARK(BM_ProductFactors)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_ToeplitzVariance(benchmark::State& st) {
  const IntervalUnion omega = IntervalUnion::single(0, 1);
  const StepSymbol1D gamma = StepSymbol1D::indicator(CompositeSet::interval(-pi / 2, pi / 2));
  for (auto _ : st) {
    auto t = toeplitz_overlap(omega, gamma, double(st.range(0)), Mode::lattice);
    benchmark::DoNotOptimize(t.hs_direct());
  }
}
BENCHMARK(BM_ToeplitzVariance)->RangeMultiplier(4)->Range(256, 16384)->Unit(benchmark::kMicrosecond);

void BM_HeadIntegralCantor(benchmark::State& st) {
  const CompositeSet a = cantor_composite(cantor_params_from_beta(0.5));
  for (auto _ : st) benchmark::DoNotOptimize(head_integral(a, double(st.range(0))));
}
BENCHMARK(BM_HeadIntegralCantor)->Arg(10)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_HsIntegral(benchmark::State& st) {
  const StepSymbol gamma({StepSymbol1D::indicator(CompositeSet::interval(-1, 1))});
  for (auto _ : st)
    benchmark::DoNotOptimize(hs_cross_norm_integral(unit_interval(Mode::continuum), gamma, double(st.range(0))));
}
BENCHMARK(BM_HsIntegral)->Arg(16)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
