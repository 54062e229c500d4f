#ifndef ROCSURF_ESTIMATORS_PARAMETRIC_HPP
#define ROCSURF_ESTIMATORS_PARAMETRIC_HPP

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "rocsurf/types.hpp"

namespace rocsurf {

// One additive term of a model formula: a variable raised to a power.
// Non-integer powers act on |x| so negative covariates stay real.
struct FormulaTerm {
  // -1 selects t, otherwise the 0-based covariate index.
  int variable = -1;
  double power = 1.0;
};

// Comma-separated terms over t, a1..ap with an optional ^power suffix
// (e.g. "t,a1^0.667"); the intercept is implicit.
struct Formula {
  std::vector<FormulaTerm> terms;

  // Design row (1, term values...) for one unit.
  std::vector<double> design_row(const Unit& unit) const;
};

Formula parse_formula(const std::string& text, std::size_t p);

// Default formula t,a1..ap.
Formula full_formula(std::size_t p);

struct LogitModel {
  std::vector<double> coefficients;
  bool converged = false;
  int iterations = 0;
  double log_likelihood = 0.0;

  double predict(const std::vector<double>& row) const;
};

// Maximum-likelihood logistic fit via IRLS. Separation is reported as
// converged = false, never as an exception.
LogitModel fit_binary_logit(const std::vector<std::vector<double>>& design,
                            const std::vector<int>& response, int max_iter = 100,
                            double tol = 1e-8);

struct MultinomialLogitModel {
  // coefficients[c] parameterizes class c+1 against reference class 3.
  std::array<std::vector<double>, 2> coefficients;
  bool converged = false;
  int iterations = 0;
  double log_likelihood = 0.0;

  Triple predict(const std::vector<double>& row) const;
};

MultinomialLogitModel fit_multinomial_logit(
    const std::vector<std::vector<double>>& design, const std::vector<int>& labels,
    int max_iter = 100, double tol = 1e-8);

struct NuisanceEstimates {
  // Fitted disease probabilities for every unit; rows sum to 1.
  std::vector<Triple> rho_hat;
  // Fitted verification propensities, strictly inside (0, 1).
  std::vector<double> pi_hat;
  bool disease_converged = false;
  bool verification_converged = false;
};

// Fits the disease model on verified units only and the verification
// model on all units, then predicts both for every unit.
NuisanceEstimates estimate_nuisance(const Dataset& dataset,
                                    const Formula& disease_formula,
                                    const Formula& verification_formula);

// Behavior of IPW/SPE when a verified unit's propensity is tiny: either
// fail loudly or clamp to the floor.
struct PropensityPolicy {
  bool clamp = false;
  double floor = 1e-3;
};

TcfEstimate estimate_tcf_fi(const Dataset& dataset, const NuisanceEstimates& nuisance,
                            const CutPair& cut);
TcfEstimate estimate_tcf_msi(const Dataset& dataset, const NuisanceEstimates& nuisance,
                             const CutPair& cut);
TcfEstimate estimate_tcf_ipw(const Dataset& dataset, const NuisanceEstimates& nuisance,
                             const CutPair& cut,
                             const PropensityPolicy& policy = {});
TcfEstimate estimate_tcf_spe(const Dataset& dataset, const NuisanceEstimates& nuisance,
                             const CutPair& cut,
                             const PropensityPolicy& policy = {});

}  // namespace rocsurf

#endif
