#include <benchmark/benchmark.h>

#include <cstddef>

#include "rocsurf/bootstrap.hpp"
#include "rocsurf/estimators_knn.hpp"
#include "rocsurf/estimators_parametric.hpp"
#include "rocsurf/neighbors.hpp"
#include "rocsurf/simulation.hpp"
#include "rocsurf/variance.hpp"

namespace {

rocsurf::Dataset sample_dataset(std::size_t n, std::uint64_t seed) {
  rocsurf::ScenarioIConfig config;
  config.n = n;
  config.seed = seed;
  return rocsurf::generate_scenario_i(config);
}

const rocsurf::CutPair kCut{2.0, 4.0};

void BM_impute_rho(benchmark::State& state) {
  const auto dataset = sample_dataset(500, 7);
  const rocsurf::Metric metric;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rocsurf::impute_rho(dataset, 3, metric));
  }
}
BENCHMARK(BM_impute_rho);

void BM_estimate_tcf_knn(benchmark::State& state) {
  const auto dataset = sample_dataset(500, 7);
  const rocsurf::Metric metric;
  const auto rho = rocsurf::impute_rho(dataset, 3, metric);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rocsurf::estimate_tcf_knn(dataset, rho, kCut));
  }
}
BENCHMARK(BM_estimate_tcf_knn);

void BM_knn_covariance(benchmark::State& state) {
  const auto dataset = sample_dataset(500, 7);
  const rocsurf::Metric metric;
  const auto moments = rocsurf::estimate_moments(dataset, 3, metric, kCut);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        rocsurf::estimate_knn_covariance(dataset, metric, moments));
  }
}
BENCHMARK(BM_knn_covariance);

void BM_bootstrap(benchmark::State& state) {
  const auto dataset = sample_dataset(100, 7);
  rocsurf::EstimatorSpec spec;
  spec.kind = rocsurf::EstimatorKind::KNN;
  spec.k = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        rocsurf::bootstrap_covariance(dataset, spec, kCut, 50, 11));
  }
}
BENCHMARK(BM_bootstrap);

void BM_fit_multinomial(benchmark::State& state) {
  const auto dataset = sample_dataset(1000, 7);
  const rocsurf::Formula formula = rocsurf::full_formula(dataset.p);
  std::vector<std::vector<double>> design;
  std::vector<int> labels;
  for (const auto& unit : dataset.units) {
    if (unit.v == 1) {
      design.push_back(formula.design_row(unit));
      labels.push_back(unit.d);
    }
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(rocsurf::fit_multinomial_logit(design, labels));
  }
}
BENCHMARK(BM_fit_multinomial);

}  // namespace

BENCHMARK_MAIN();
