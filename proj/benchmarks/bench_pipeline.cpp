#include "dmuq/dmap.hpp"
#include "dmuq/filter.hpp"
#include "dmuq/oracles.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace dmuq;

namespace {

SampleSet ou(std::size_t n) {
  SdeSpec spec;
  spec.seed = 11;
  return euler_maruyama(spec, n * 20, 20);
}

struct Stage {
  SampleSet samples;
  NeighborTable neighbors;
  Bandwidth bandwidth;
  EpsilonTuning tuning;
  NormalizedKernel normalized;

  explicit Stage(std::size_t n) : samples(ou(n)) {
    neighbors = knn(samples, std::min<std::size_t>(n - 1, 1024));
    const PilotDensity pilot = pilot_density(neighbors, 8, 1.0);
    const Bandwidth pilot_bw = build_bandwidth(pilot.q0, BandwidthMode::equilibrium);
    const EpsilonTuning pilot_tuning = tune_epsilon(samples, neighbors, pilot_bw);
    const AffinityMatrix pilot_kernel = build_kernel(samples, neighbors, pilot_bw, pilot_tuning.epsilon);
    bandwidth = build_bandwidth(normalize_and_generator(pilot_kernel, pilot_bw, pilot_tuning.d).q_eps,
                                BandwidthMode::equilibrium);
    tuning = tune_epsilon(samples, neighbors, bandwidth);
    const AffinityMatrix K = build_kernel(samples, neighbors, bandwidth, tuning.epsilon);
    normalized = normalize_and_generator(K, bandwidth, tuning.d);
  }
};

void BM_knn(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const SampleSet s = ou(n);
  for (auto _ : state) benchmark::DoNotOptimize(knn(s, 64));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_knn)->Arg(1000)->Arg(4000)->Arg(16000)->Unit(benchmark::kMillisecond)->Complexity();

void BM_kernel(benchmark::State& state) {
  const Stage st(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    const AffinityMatrix K = build_kernel(st.samples, st.neighbors, st.bandwidth, st.tuning.epsilon);
    benchmark::DoNotOptimize(normalize_and_generator(K, st.bandwidth, st.tuning.d));
  }
}
BENCHMARK(BM_kernel)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_eigenbasis(benchmark::State& state) {
  const Stage st(static_cast<std::size_t>(state.range(0)));
  SymEigsOptions opt;
  opt.route = state.range(1) == 0 ? EigenRoute::dense : EigenRoute::sparse;
  for (auto _ : state) benchmark::DoNotOptimize(eigenbasis(st.normalized, 50, opt));
  state.SetLabel(state.range(1) == 0 ? "dense" : "sparse");
}
BENCHMARK(BM_eigenbasis)
    ->Args({1000, 0})
    ->Args({1000, 1})
    ->Args({5000, 1})
    ->Unit(benchmark::kMillisecond);

void BM_assimilate_step(benchmark::State& state) {
  const auto M = state.range(0);
  FitOptions fo;
  fo.M = M;
  GeneratorModel model = fit_generator(ou(2000), fo);
  model.D = 1.0;
  const ObservationOperator op = build_observation_operator(model.points.points(), model);
  CoefficientVector c;
  c.c = Vector::Zero(model.modes());
  c.c(0) = 1.0;
  const Vector dz = Vector::Constant(1, 0.01);
  const Matrix R = Matrix::Constant(1, 1, 0.05);
  for (auto _ : state) benchmark::DoNotOptimize(assimilate_step(c, dz, op, model, 0.2, R));
}
BENCHMARK(BM_assimilate_step)->Arg(10)->Arg(50)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
