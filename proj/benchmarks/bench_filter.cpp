#include <benchmark/benchmark.h>

#include "hemoda/ensisf.hpp"
#include "hemoda/random.hpp"

namespace {

using namespace hemoda;

JointEnsemble random_ensemble(int n, int members) {
  JointEnsemble e{{1, n - 1}, Eigen::MatrixXd(n, members)};
  KeyedStream rng(7, StreamTag::kPrior, {});
  for (int i = 0; i < members; ++i)
    for (int k = 0; k < n; ++k) e.members(k, i) = rng.normal();
  return e;
}

LinearObservation every_nth(int n, int m) {
  std::vector<LinearObservation::Row> rows;
  for (int r = 0; r < m; ++r) rows.push_back({{1 + r * ((n - 1) / m), 1.0}});
  return LinearObservation(n, std::move(rows));
}

// Update for the coarse-vessel dimensions: ~1.5k entries, 54 observations.
void BM_MeasurementUpdate(benchmark::State& state) {
  const int members = static_cast<int>(state.range(0));
  const int n = 1552;
  const auto h = every_nth(n, 54);
  const Eigen::VectorXd y = Eigen::VectorXd::Zero(54);
  const NoiseSpec noise{0.0, 1e-8};
  const UpdateConfig config;
  for (auto _ : state) {
    state.PauseTiming();
    JointEnsemble e = random_ensemble(n, members);
    state.ResumeTiming();
    assimilate_observation(e, h, y, noise, config, 1, 1);
    benchmark::DoNotOptimize(e.members.data());
  }
}
BENCHMARK(BM_MeasurementUpdate)->Arg(80)->Arg(400)->Unit(benchmark::kMicrosecond);

void BM_Covariances(benchmark::State& state) {
  const JointEnsemble e = random_ensemble(1552, 80);
  const auto y = every_nth(1552, 54).apply(e);
  for (auto _ : state) benchmark::DoNotOptimize(covariances(e, y));
}
BENCHMARK(BM_Covariances)->Unit(benchmark::kMicrosecond);

}  // namespace
