#include "rocsurf/types.hpp"

#include <sstream>

namespace rocsurf {

void check_cut(const CutPair& cut) {
  if (!(cut.c1 < cut.c2)) {
    std::ostringstream msg;
    msg << "cut points must satisfy c1 < c2, got c1 = " << cut.c1
        << ", c2 = " << cut.c2;
    throw validation_error(msg.str());
  }
}

std::string estimator_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::COMPLETE: return "complete";
    case EstimatorKind::FI: return "fi";
    case EstimatorKind::MSI: return "msi";
    case EstimatorKind::IPW: return "ipw";
    case EstimatorKind::SPE: return "spe";
    case EstimatorKind::KNN: return "knn";
  }
  return "unknown";
}

}  // namespace rocsurf
