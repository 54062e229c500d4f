#ifndef ROCSURF_ESTIMATORS_KNN_HPP
#define ROCSURF_ESTIMATORS_KNN_HPP

#include <array>
#include <cstddef>

#include "rocsurf/neighbors.hpp"
#include "rocsurf/types.hpp"

namespace rocsurf {

// Sample moments behind the KNN TCF triple. beta[j-1][k-1] estimates
// Pr(T >= c_j, D = k); gamma[j-1][k-1] = theta[k-1] - beta[j-1][k-1].
struct MomentSet {
  Triple theta{0.0, 0.0, 0.0};
  std::array<Triple, 2> beta{Triple{0.0, 0.0, 0.0}, Triple{0.0, 0.0, 0.0}};
  std::array<Triple, 2> gamma{Triple{0.0, 0.0, 0.0}, Triple{0.0, 0.0, 0.0}};
  std::size_t k = 0;
  CutPair cut;
};

// Moments from an already computed imputation matrix (shared across cut
// points) or from scratch.
MomentSet estimate_moments(const Dataset& dataset, const RhoMatrix& rho,
                           const CutPair& cut);
MomentSet estimate_moments(const Dataset& dataset, std::size_t k,
                           const Metric& metric, const CutPair& cut);

TcfEstimate estimate_tcf_knn(const Dataset& dataset, const RhoMatrix& rho,
                             const CutPair& cut);
TcfEstimate estimate_tcf_knn(const Dataset& dataset, std::size_t k,
                             const Metric& metric, const CutPair& cut);

// Empirical TCFs on a fully verified dataset.
TcfEstimate complete_data_tcf(const Dataset& dataset, const CutPair& cut);

// Sample moments of a fully verified dataset (k = 0).
MomentSet complete_data_moments(const Dataset& dataset, const CutPair& cut);

}  // namespace rocsurf

#endif
