#ifndef ROCSURF_VARIANCE_HPP
#define ROCSURF_VARIANCE_HPP

#include <array>
#include <cstddef>

#include "rocsurf/estimators_knn.hpp"
#include "rocsurf/neighbors.hpp"
#include "rocsurf/types.hpp"

namespace rocsurf {

// Plug-in moment terms entering the asymptotic covariance of the KNN
// TCF triple. omega_jk, eta_jk and the psi family are indexed like beta:
// j is the cut index, k the class.
struct OmegaSet {
  Triple omega_k{0.0, 0.0, 0.0};
  std::array<Triple, 2> omega_jk{Triple{0.0, 0.0, 0.0}, Triple{0.0, 0.0, 0.0}};
  std::array<Triple, 2> eta_jk{Triple{0.0, 0.0, 0.0}, Triple{0.0, 0.0, 0.0}};
  double psi_1212 = 0.0;
  double psi_112 = 0.0;
  double psi_213 = 0.0;
  double psi_12 = 0.0;
  double psi_113 = 0.0;
  double psi_223 = 0.0;
  double psi_1223 = 0.0;
  double lambda_sq = 0.0;
  std::size_t k_imputation = 0;
  std::size_t k_bar = 0;
};

struct PluginEstimates {
  RhoMatrix rho_tilde;
  std::vector<double> pi_tilde;
  std::vector<std::size_t> k_star;
};

// Imputation-based rho and adaptive propensity used inside the variance
// plug-ins; k_bar must be at least 2. A fully verified dataset takes the
// fast path pi = 1 everywhere.
PluginEstimates plugin_rho_pi(const Dataset& dataset, const Metric& metric,
                              std::size_t k_bar);

// Every omega, eta and psi term as the empirical-mean version of its
// defining expectation, plus lambda_sq assembled from the moments.
// k_imputation is the neighborhood size of the estimator under study
// (the moments' k), not k_bar.
OmegaSet omega_terms(const Dataset& dataset, const RhoMatrix& rho_tilde,
                     const std::vector<double>& pi_tilde,
                     std::size_t k_imputation, const MomentSet& moments);

// Omega set of a complete-data analysis: all imputation terms vanish.
OmegaSet complete_data_omegas(const MomentSet& moments);

// Asymptotic covariance of the moment vector
// (theta1, theta2, beta11, beta12, beta22, beta23).
struct SigmaStar {
  Matrix6 matrix{};
};

SigmaStar build_sigma_star(const MomentSet& moments, const OmegaSet& omegas);

// Asymptotic covariance of sqrt(n) * (TCF1, TCF2, TCF3).
struct Xi {
  Matrix3 matrix{};
};

// Direct scalar formulas for the entries of Xi.
Xi xi_scalar(const MomentSet& moments, const OmegaSet& omegas);

// Delta-method route: conjugation of SigmaStar by the Jacobian of the
// moments-to-TCF map. Agrees with xi_scalar to floating-point accuracy.
Xi xi_delta_method(const MomentSet& moments, const SigmaStar& sigma_star);

// Full pipeline: plug-in rho/pi, omega terms, scalar Xi, divided by n.
// Throws numerical_error if a diagonal entry comes out negative.
Matrix3 estimate_knn_covariance(const Dataset& dataset, const Metric& metric,
                                const MomentSet& moments, std::size_t k_bar = 2);

struct EllipsoidSpec {
  Triple center{0.0, 0.0, 0.0};
  // Lower-triangular Cholesky factor of the covariance.
  Matrix3 cholesky{};
  double radius2 = 0.0;
  double level = 0.0;
};

// Ellipsoidal confidence region from asymptotic normality: the set of x
// with (x - center)' C^{-1} (x - center) <= radius2.
EllipsoidSpec confidence_ellipsoid(const TcfEstimate& estimate, double level);

}  // namespace rocsurf

#endif
