#include "rocsurf/bootstrap.hpp"

#include <sstream>

#include "rocsurf/estimators_knn.hpp"
#include "rocsurf/rng.hpp"

namespace rocsurf {

TcfEstimate apply_estimator(const Dataset& dataset, const EstimatorSpec& spec,
                            const CutPair& cut) {
  switch (spec.kind) {
    case EstimatorKind::COMPLETE:
      return complete_data_tcf(dataset, cut);
    case EstimatorKind::KNN:
      return estimate_tcf_knn(dataset, spec.k, spec.metric, cut);
    case EstimatorKind::FI:
    case EstimatorKind::MSI:
    case EstimatorKind::IPW:
    case EstimatorKind::SPE: {
      const Formula disease =
          spec.disease_formula ? *spec.disease_formula : full_formula(dataset.p);
      const Formula verification = spec.verification_formula
                                       ? *spec.verification_formula
                                       : full_formula(dataset.p);
      const NuisanceEstimates nuisance =
          estimate_nuisance(dataset, disease, verification);
      switch (spec.kind) {
        case EstimatorKind::FI:
          return estimate_tcf_fi(dataset, nuisance, cut);
        case EstimatorKind::MSI:
          return estimate_tcf_msi(dataset, nuisance, cut);
        case EstimatorKind::IPW:
          return estimate_tcf_ipw(dataset, nuisance, cut, spec.policy);
        default:
          return estimate_tcf_spe(dataset, nuisance, cut, spec.policy);
      }
    }
  }
  throw validation_error("unknown estimator kind");
}

BootstrapResult bootstrap_covariance(const Dataset& dataset,
                                     const EstimatorSpec& spec, const CutPair& cut,
                                     std::size_t b, std::uint64_t seed) {
  check_cut(cut);
  if (b < 2) throw validation_error("bootstrap needs at least 2 replicates");
  const std::size_t n = dataset.n();
  if (n == 0) throw validation_error("empty dataset");

  BootstrapResult result;
  result.b = b;
  result.seed = seed;
  result.replicates.reserve(b);
  Dataset resampled;
  resampled.p = dataset.p;
  resampled.units.resize(n);
  for (std::size_t j = 0; j < b; ++j) {
    Rng rng(derive_seed(seed, j));
    for (std::size_t i = 0; i < n; ++i) {
      resampled.units[i] = dataset.units[rng.below(n)];
    }
    try {
      const TcfEstimate est = apply_estimator(resampled, spec, cut);
      result.replicates.push_back(est.tcf);
    } catch (const validation_error&) {
      ++result.failures;
    } catch (const numerical_error&) {
      ++result.failures;
    }
  }
  if (result.failures * 2 > b) {
    std::ostringstream msg;
    msg << result.failures << " of " << b
        << " bootstrap replicates failed; the resampled estimator is too "
           "unstable to summarize";
    throw numerical_error(msg.str());
  }
  const std::size_t used = result.replicates.size();
  if (used < 2) {
    throw numerical_error("fewer than 2 usable bootstrap replicates");
  }

  Triple mean{0.0, 0.0, 0.0};
  for (const Triple& r : result.replicates) {
    for (std::size_t k = 0; k < 3; ++k) mean[k] += r[k];
  }
  for (std::size_t k = 0; k < 3; ++k) mean[k] /= static_cast<double>(used);
  for (const Triple& r : result.replicates) {
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        result.covariance[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]);
      }
    }
  }
  const double denom = static_cast<double>(used - 1);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) result.covariance[i][j] /= denom;
  }
  return result;
}

}  // namespace rocsurf
