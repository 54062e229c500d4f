#ifndef ROCSURF_SIMULATION_HPP
#define ROCSURF_SIMULATION_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rocsurf/bootstrap.hpp"
#include "rocsurf/neighbors.hpp"
#include "rocsurf/types.hpp"

namespace rocsurf {

// Trinomial disease, bivariate normal (T, A) within class k with mean
// (2k, k), logistic verification.
struct ScenarioIConfig {
  Triple theta{0.4, 0.35, 0.25};
  int sigma_choice = 1;
  std::array<double, 3> delta{0.5, -0.3, 0.75};
  std::size_t n = 250;
  std::uint64_t seed = 1;
  // False keeps labels on unverified units; such oracle draws do not
  // round-trip through the CSV loader.
  bool mask_labels = true;
};

// The three covariance choices for (T, A) given the class.
std::array<std::array<double, 2>, 2> scenario_i_sigma(int sigma_choice);

// Latent Z1 + Z2 thresholded into classes; T and A are noisy linear
// readouts of the latent sum.
struct ScenarioIIConfig {
  double alpha = 0.5;
  double theta1 = 0.4;
  double theta3 = 0.25;
  double noise_variance = 0.25;
  std::array<double, 3> delta{-1.5, -0.35, -1.5};
  std::size_t n = 1000;
  std::uint64_t seed = 1;
  // See ScenarioIConfig::mask_labels.
  bool mask_labels = true;
};

Dataset generate_scenario_i(const ScenarioIConfig& config);
Dataset generate_scenario_ii(const ScenarioIIConfig& config);

// Class thresholds on the standard normal latent sum.
std::pair<double, double> solve_thresholds(double theta1, double theta3);

enum class TruthMethod { CLOSED_FORM_PHI, NUMERIC_INTEGRATION };

struct ScenarioTruth {
  Triple tcf{0.0, 0.0, 0.0};
  std::optional<double> vus;
  TruthMethod method = TruthMethod::CLOSED_FORM_PHI;
};

ScenarioTruth true_tcf_scenario_i(int sigma_choice, const CutPair& cut);
ScenarioTruth true_tcf_scenario_ii(const ScenarioIIConfig& config,
                                   const CutPair& cut);

double true_vus_scenario_i(int sigma_choice);

// Empirical ordering frequency over all class-1 x class-2 x class-3
// triples of a fully verified dataset. Strict ordering by default; the
// tie-weight option credits ties with 1/2 and 1/6.
double complete_data_vus(const Dataset& dataset, bool tie_weights = false);

struct SimConfig {
  int scenario = 1;
  std::size_t n = 250;
  std::size_t reps = 500;
  std::uint64_t seed = 1;
  int sigma_choice = 1;
  double alpha = 0.5;
  std::vector<CutPair> cuts;
  // Parametric and complete-data estimators to run.
  std::vector<EstimatorKind> estimators;
  // KNN neighborhood sizes; one summary row per size.
  std::vector<std::size_t> k;
  Metric metric;
  std::size_t k_bar = 2;
};

// Flat key = value text, # comments. Keys: scenario, n, reps, seed,
// sigma_choice, alpha, cuts, estimators, k, metric, k_bar.
SimConfig parse_sim_config(std::istream& in);

struct SummaryRow {
  std::string estimator;
  CutPair cut;
  Triple mean{0.0, 0.0, 0.0};
  // Absent when fewer than 2 replications survived.
  std::optional<Triple> mc_sd;
  // Mean estimated asymptotic sd; KNN rows only.
  std::optional<Triple> asy_sd_mean;
  // Per-component frequency of estimates outside [0, 1].
  Triple oor_freq{0.0, 0.0, 0.0};
  std::size_t reps_used = 0;
  std::size_t failures = 0;
};

struct SummaryTable {
  std::vector<std::pair<CutPair, Triple>> truth;
  std::vector<SummaryRow> rows;
};

// Monte Carlo harness: per replication one dataset, shared nuisance fits
// and imputations across cuts and estimators, summaries per estimator
// and cut. Deterministic under the config seed.
SummaryTable run_monte_carlo(const SimConfig& config);

void write_summary_csv(const SummaryTable& table, std::ostream& out);

}  // namespace rocsurf

#endif
