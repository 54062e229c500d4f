#ifndef ROCSURF_BOOTSTRAP_HPP
#define ROCSURF_BOOTSTRAP_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "rocsurf/estimators_parametric.hpp"
#include "rocsurf/neighbors.hpp"
#include "rocsurf/types.hpp"

namespace rocsurf {

// Everything needed to run one estimator on one dataset. Formulas left
// unset default to the full design t,a1..ap.
struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::KNN;
  std::size_t k = 1;
  Metric metric;
  std::optional<Formula> disease_formula;
  std::optional<Formula> verification_formula;
  PropensityPolicy policy;
};

// Runs the estimator described by spec; shared by bootstrap, the Monte
// Carlo harness and the CLI.
TcfEstimate apply_estimator(const Dataset& dataset, const EstimatorSpec& spec,
                            const CutPair& cut);

struct BootstrapResult {
  Matrix3 covariance{};
  std::vector<Triple> replicates;
  std::size_t b = 0;
  std::uint64_t seed = 0;
  std::size_t failures = 0;
};

// Unit-level resampling with replacement; imputation and nuisance models
// are refit inside every replicate. Replicates whose estimator fails are
// discarded and counted; more than b/2 failures is an error.
BootstrapResult bootstrap_covariance(const Dataset& dataset,
                                     const EstimatorSpec& spec, const CutPair& cut,
                                     std::size_t b, std::uint64_t seed);

}  // namespace rocsurf

#endif
