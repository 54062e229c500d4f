#include "rocsurf/surface.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "rocsurf/estimators_knn.hpp"

namespace rocsurf {

namespace {

std::vector<double> quantile_candidates(const Dataset& dataset, std::size_t m,
                                        std::vector<std::string>& notes) {
  if (m < 2) throw validation_error("quantile grids need m >= 2");
  std::vector<double> t;
  t.reserve(dataset.n());
  for (const auto& unit : dataset.units) t.push_back(unit.t);
  std::sort(t.begin(), t.end());
  const double nd = static_cast<double>(t.size());

  std::vector<double> candidates;
  candidates.reserve(m);
  for (std::size_t j = 1; j <= m; ++j) {
    const double level = static_cast<double>(j) / static_cast<double>(m + 1);
    const double pos = std::ceil(level * nd) - 1.0;
    const std::size_t idx = static_cast<std::size_t>(
        std::min(std::max(pos, 0.0), nd - 1.0));
    candidates.push_back(t[idx]);
  }
  const std::size_t requested = candidates.size();
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());
  if (candidates.size() < requested) {
    std::ostringstream msg;
    msg << "tied quantiles reduced the cut candidates from " << requested
        << " to " << candidates.size();
    notes.push_back(msg.str());
  }
  if (candidates.size() < 2) {
    throw validation_error(
        "quantile grid collapsed to fewer than 2 distinct cut candidates");
  }
  return candidates;
}

std::string describe_cut(const CutPair& cut) {
  char buf[80];
  std::snprintf(buf, sizeof(buf), "(%g, %g)", cut.c1, cut.c2);
  return buf;
}

constexpr double kMonotoneSlack = 1e-12;

bool envelope_holds(const std::vector<SurfacePoint>& points) {
  for (std::size_t a = 0; a < points.size(); ++a) {
    for (std::size_t b = 0; b < points.size(); ++b) {
      if (a == b) continue;
      const auto& pa = points[a];
      const auto& pb = points[b];
      if (pa.cut.c2 == pb.cut.c2 && pa.cut.c1 < pb.cut.c1) {
        if (pa.tcf[0] > pb.tcf[0] + kMonotoneSlack) return false;
      }
      if (pa.cut.c1 == pb.cut.c1 && pa.cut.c2 < pb.cut.c2) {
        if (pa.tcf[2] < pb.tcf[2] - kMonotoneSlack) return false;
      }
    }
  }
  return true;
}

}  // namespace

SurfaceGrid roc_surface(const Dataset& dataset, const EstimatorSpec& spec,
                        const GridSpec& grid) {
  if (dataset.n() == 0) throw validation_error("empty dataset");
  SurfaceGrid out;

  std::vector<CutPair> cuts;
  if (grid.kind == GridSpec::Kind::EXPLICIT) {
    if (grid.cuts.empty()) {
      throw validation_error("explicit grid carries no cut pairs");
    }
    for (const CutPair& cut : grid.cuts) {
      check_cut(cut);
      cuts.push_back(cut);
    }
  } else {
    const std::vector<double> candidates =
        quantile_candidates(dataset, grid.m, out.notes);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      for (std::size_t j = i + 1; j < candidates.size(); ++j) {
        cuts.push_back(CutPair{candidates[i], candidates[j]});
      }
    }
  }

  // Shared state across grid points: the imputation matrix for KNN, the
  // fitted nuisance models for the parametric estimators.
  RhoMatrix rho;
  NuisanceEstimates nuisance;
  switch (spec.kind) {
    case EstimatorKind::KNN:
      rho = impute_rho(dataset, spec.k, spec.metric);
      break;
    case EstimatorKind::FI:
    case EstimatorKind::MSI:
    case EstimatorKind::IPW:
    case EstimatorKind::SPE: {
      const Formula disease =
          spec.disease_formula ? *spec.disease_formula : full_formula(dataset.p);
      const Formula verification = spec.verification_formula
                                       ? *spec.verification_formula
                                       : full_formula(dataset.p);
      nuisance = estimate_nuisance(dataset, disease, verification);
      break;
    }
    case EstimatorKind::COMPLETE:
      break;
  }

  for (const CutPair& cut : cuts) {
    try {
      TcfEstimate est;
      switch (spec.kind) {
        case EstimatorKind::KNN:
          est = estimate_tcf_knn(dataset, rho, cut);
          break;
        case EstimatorKind::COMPLETE:
          est = complete_data_tcf(dataset, cut);
          break;
        case EstimatorKind::FI:
          est = estimate_tcf_fi(dataset, nuisance, cut);
          break;
        case EstimatorKind::MSI:
          est = estimate_tcf_msi(dataset, nuisance, cut);
          break;
        case EstimatorKind::IPW:
          est = estimate_tcf_ipw(dataset, nuisance, cut, spec.policy);
          break;
        case EstimatorKind::SPE:
          est = estimate_tcf_spe(dataset, nuisance, cut, spec.policy);
          break;
      }
      SurfacePoint point;
      point.cut = cut;
      point.tcf = est.tcf;
      point.out_of_range = est.out_of_range;
      out.points.push_back(point);
    } catch (const numerical_error& err) {
      out.notes.push_back("skipped " + describe_cut(cut) + ": " + err.what());
    }
  }

  out.monotone_envelope = envelope_holds(out.points);
  return out;
}

void write_surface_csv(const SurfaceGrid& grid, std::ostream& out) {
  out << "c1,c2,tcf1,tcf2,tcf3\n";
  char buf[64];
  for (const SurfacePoint& point : grid.points) {
    const double row[5] = {point.cut.c1, point.cut.c2, point.tcf[0],
                           point.tcf[1], point.tcf[2]};
    for (int i = 0; i < 5; ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", row[i]);
      out << (i == 0 ? "" : ",") << buf;
    }
    out << '\n';
  }
}

}  // namespace rocsurf
