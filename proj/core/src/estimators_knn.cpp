#include "rocsurf/estimators_knn.hpp"

#include <sstream>

namespace rocsurf {

namespace {

// Undivided sums behind the moments. TCF ratios are formed directly from
// these so that shared factors cancel exactly.
struct RawMoments {
  Triple s{0.0, 0.0, 0.0};
  std::array<Triple, 2> b{Triple{0.0, 0.0, 0.0}, Triple{0.0, 0.0, 0.0}};
  std::array<Triple, 2> g{Triple{0.0, 0.0, 0.0}, Triple{0.0, 0.0, 0.0}};
};

RawMoments raw_moments(const Dataset& dataset, const RhoMatrix& rho,
                       const CutPair& cut) {
  check_cut(cut);
  if (rho.values.size() != dataset.n()) {
    throw validation_error("imputation matrix size does not match dataset");
  }
  RawMoments raw;
  for (std::size_t i = 0; i < dataset.n(); ++i) {
    const auto& u = dataset.units[i];
    for (std::size_t k = 0; k < 3; ++k) {
      const double c =
          u.v == 1 ? (u.d == static_cast<int>(k) + 1 ? 1.0 : 0.0) : rho.values[i][k];
      raw.s[k] += c;
      if (u.t >= cut.c1) raw.b[0][k] += c;
      if (u.t >= cut.c2) raw.b[1][k] += c;
      if (u.t < cut.c1) raw.g[0][k] += c;
      if (u.t < cut.c2) raw.g[1][k] += c;
    }
  }
  return raw;
}

MomentSet divide_moments(const RawMoments& raw, std::size_t n, std::size_t k,
                         const CutPair& cut) {
  const double nd = static_cast<double>(n);
  MomentSet m;
  m.k = k;
  m.cut = cut;
  for (std::size_t kk = 0; kk < 3; ++kk) {
    m.theta[kk] = raw.s[kk] / nd;
    for (std::size_t j = 0; j < 2; ++j) {
      m.beta[j][kk] = raw.b[j][kk] / nd;
      m.gamma[j][kk] = raw.g[j][kk] / nd;
    }
  }
  return m;
}

TcfEstimate tcf_from_raw(const RawMoments& raw, const CutPair& cut) {
  for (std::size_t k = 0; k < 3; ++k) {
    if (!(raw.s[k] > 0.0)) {
      std::ostringstream msg;
      msg << "class " << (k + 1) << " has zero estimated mass";
      throw numerical_error(msg.str());
    }
  }
  TcfEstimate est;
  est.cut = cut;
  est.tcf[0] = 1.0 - raw.b[0][0] / raw.s[0];
  est.tcf[1] = (raw.b[0][1] - raw.b[1][1]) / raw.s[1];
  est.tcf[2] = raw.b[1][2] / raw.s[2];
  return est;
}

RawMoments raw_complete(const Dataset& dataset, const CutPair& cut) {
  check_cut(cut);
  RawMoments raw;
  for (std::size_t i = 0; i < dataset.n(); ++i) {
    const auto& u = dataset.units[i];
    if (u.v != 1) {
      std::ostringstream msg;
      msg << "complete-data estimator requires full verification; unit "
          << (i + 1) << " is unverified";
      throw validation_error(msg.str());
    }
    for (std::size_t k = 0; k < 3; ++k) {
      const double c = u.d == static_cast<int>(k) + 1 ? 1.0 : 0.0;
      raw.s[k] += c;
      if (u.t >= cut.c1) raw.b[0][k] += c;
      if (u.t >= cut.c2) raw.b[1][k] += c;
      if (u.t < cut.c1) raw.g[0][k] += c;
      if (u.t < cut.c2) raw.g[1][k] += c;
    }
  }
  return raw;
}

}  // namespace

MomentSet estimate_moments(const Dataset& dataset, const RhoMatrix& rho,
                           const CutPair& cut) {
  return divide_moments(raw_moments(dataset, rho, cut), dataset.n(), rho.k, cut);
}

MomentSet estimate_moments(const Dataset& dataset, std::size_t k,
                           const Metric& metric, const CutPair& cut) {
  return estimate_moments(dataset, impute_rho(dataset, k, metric), cut);
}

TcfEstimate estimate_tcf_knn(const Dataset& dataset, const RhoMatrix& rho,
                             const CutPair& cut) {
  TcfEstimate est = tcf_from_raw(raw_moments(dataset, rho, cut), cut);
  est.estimator = EstimatorKind::KNN;
  est.k = static_cast<int>(rho.k);
  return est;
}

TcfEstimate estimate_tcf_knn(const Dataset& dataset, std::size_t k,
                             const Metric& metric, const CutPair& cut) {
  return estimate_tcf_knn(dataset, impute_rho(dataset, k, metric), cut);
}

TcfEstimate complete_data_tcf(const Dataset& dataset, const CutPair& cut) {
  TcfEstimate est = tcf_from_raw(raw_complete(dataset, cut), cut);
  est.estimator = EstimatorKind::COMPLETE;
  return est;
}

MomentSet complete_data_moments(const Dataset& dataset, const CutPair& cut) {
  return divide_moments(raw_complete(dataset, cut), dataset.n(), 0, cut);
}

}  // namespace rocsurf
