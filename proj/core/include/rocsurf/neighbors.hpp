#ifndef ROCSURF_NEIGHBORS_HPP
#define ROCSURF_NEIGHBORS_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "rocsurf/types.hpp"

namespace rocsurf {

enum class MetricKind { EUCLIDEAN, MANHATTAN, CANBERRA, MAHALANOBIS };

struct Metric {
  MetricKind kind = MetricKind::EUCLIDEAN;
  // (p+1)x(p+1) SPD covariance over the joint (t, a) feature vector,
  // row-major. When absent for MAHALANOBIS it is estimated from all units.
  std::optional<std::vector<std::vector<double>>> mahalanobis_covariance;
};

Metric parse_metric(const std::string& name);

// Distance between two feature vectors. For MAHALANOBIS the metric must
// carry a covariance (resolve_metric fills it in from a dataset).
double distance(const std::vector<double>& x, const std::vector<double>& y,
                const Metric& metric);

// Returns a copy of the metric with the Mahalanobis covariance populated
// from the sample covariance of all units' (t, a) features if missing.
Metric resolve_metric(const Metric& metric, const Dataset& dataset);

enum class NeighborPool { VERIFIED, ALL };

// Indices of the k nearest pool members to the query unit, ascending
// distance, ties broken by ascending original index. The query unit is
// never its own neighbor.
std::vector<std::size_t> knn_indices(std::size_t query, std::size_t k,
                                     const Dataset& dataset, const Metric& metric,
                                     NeighborPool pool);

// Row i holds the class-frequency vector of unit i's k nearest verified
// neighbors. counts stores the underlying integer tallies, so
// counts[i][0] + counts[i][1] + counts[i][2] = k exactly.
struct RhoMatrix {
  std::vector<Triple> values;
  std::vector<std::array<int, 3>> counts;
  std::size_t k = 0;
};

RhoMatrix impute_rho(const Dataset& dataset, std::size_t k, const Metric& metric);

struct PropensityVector {
  std::vector<double> values;
  std::vector<std::size_t> k_star;
};

// Adaptive verification propensity: for an unverified unit, K* is the
// rank of its first verified neighbor and pi = 1/K*; for a verified unit
// the chain starts at the unit itself, K* = 1 + rank of its first
// unverified neighbor, pi = (K* - 1)/K*. Always strictly positive.
PropensityVector adaptive_propensity(const Dataset& dataset, const Metric& metric);

struct KSelection {
  std::size_t k_star = 0;
  // criterion[k-1] is the L11 score at neighborhood size k.
  std::vector<double> criterion;
};

// Cross-validated K: minimizes the mean L1 distance between verified
// labels and their leave-one-out imputations over K in [1, k_max], using
// the first two label columns; smallest K wins ties.
KSelection select_k(const Dataset& dataset, const Metric& metric,
                    std::size_t k_max);

}  // namespace rocsurf

#endif
