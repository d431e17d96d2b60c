// Serial reference kernels against their OpenMP versions.
//
//   build/bench/bench_kernels --benchmark_filter=GaussianSums

#include <benchmark/benchmark.h>

#include <random>

#include "ecoap/clustering.hpp"
#include "ecoap/kernels.hpp"
#include "ecoap/topology.hpp"

using namespace ecoap;

namespace {

Points rss_like(std::size_t n, std::size_t dim) {
  std::mt19937_64 rng(n * 31 + dim);
  std::normal_distribution<double> g(-70.0, 8.0);
  Points p(n, dim);
  for (auto& v : p.data) v = g(rng);
  return p;
}

void BM_GaussianSums_Serial(benchmark::State& state) {
  const Points p = rss_like(static_cast<std::size_t>(state.range(0)), 11);
  const double h = select_bandwidth(p);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::gaussian_sums(p, p, h));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

void BM_GaussianSums_Parallel(benchmark::State& state) {
  const Points p = rss_like(static_cast<std::size_t>(state.range(0)), 11);
  const double h = select_bandwidth(p);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::parallel::gaussian_sums(p, p, h));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

void BM_MeanShift_Serial(benchmark::State& state) {
  const Points p = rss_like(static_cast<std::size_t>(state.range(0)), 11);
  const double h = select_bandwidth(p);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::mean_shift_all(p, p, h, 1e-3 * h, 500));
}

void BM_MeanShift_Parallel(benchmark::State& state) {
  const Points p = rss_like(static_cast<std::size_t>(state.range(0)), 11);
  const double h = select_bandwidth(p);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::parallel::mean_shift_all(p, p, h, 1e-3 * h, 500));
}

// Oracle search over a synthetic floor with `range(0)` APs.
struct OracleCase {
  RssMatrix matrix;
  std::vector<double> demands;
  std::vector<ApSpec> aps;
};

OracleCase oracle_case(int n_ap) {
  ScenarioConfig cfg;
  cfg.ap_count = n_ap;
  auto sc = sample_scenario(cfg, 3);
  PropagationModel model;
  OracleCase c;
  std::vector<int> ue_ids, ap_ids;
  std::vector<double> ref;
  for (const auto& u : sc.ues) ue_ids.push_back(u.id);
  for (const auto& a : sc.aps) ap_ids.push_back(a.id), ref.push_back(a.tx_power);
  c.matrix = RssMatrix(ue_ids, ap_ids, ref);
  for (std::size_t u = 0; u < sc.ues.size(); ++u)
    for (std::size_t a = 0; a < sc.aps.size(); ++a) {
      const double v = sc.aps[a].tx_power - path_loss(distance(sc.ues[u].position, sc.aps[a].position), model);
      c.matrix.at(u, a) = v >= model.sensitivity ? v : kNotDetected;
    }
  c.demands.assign(sc.ues.size(), 2.0);
  c.aps = ap_specs(sc.aps);
  return c;
}

void BM_Oracle_Serial(benchmark::State& state) {
  const OracleCase c = oracle_case(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(exhaustive_oracle(c.matrix, c.demands, QosModel{}, c.aps, kOracleMaxAps, Exec::Serial));
}

void BM_Oracle_Parallel(benchmark::State& state) {
  const OracleCase c = oracle_case(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(
        exhaustive_oracle(c.matrix, c.demands, QosModel{}, c.aps, kOracleMaxAps, Exec::Parallel));
}

}  // namespace

BENCHMARK(BM_GaussianSums_Serial)->Arg(64)->Arg(512)->Arg(2048)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GaussianSums_Parallel)->Arg(64)->Arg(512)->Arg(2048)->Unit(benchmark::kMicrosecond)->UseRealTime();
BENCHMARK(BM_MeanShift_Serial)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MeanShift_Parallel)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Oracle_Serial)->Arg(6)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Oracle_Parallel)->Arg(6)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
