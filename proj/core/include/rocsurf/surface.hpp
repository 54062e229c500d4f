#ifndef ROCSURF_SURFACE_HPP
#define ROCSURF_SURFACE_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "rocsurf/bootstrap.hpp"
#include "rocsurf/types.hpp"

namespace rocsurf {

struct GridSpec {
  enum class Kind { QUANTILE, EXPLICIT };
  Kind kind = Kind::QUANTILE;
  // Quantile grids place cut candidates at m equally spaced empirical
  // quantiles of t and form all pairs with c1 < c2.
  std::size_t m = 10;
  std::vector<CutPair> cuts;
};

struct SurfacePoint {
  CutPair cut;
  Triple tcf{0.0, 0.0, 0.0};
  bool out_of_range = false;
};

struct SurfaceGrid {
  std::vector<SurfacePoint> points;
  std::vector<std::string> notes;
  // True when the evaluated points satisfy the cut-monotonicity
  // relations along both grid axes.
  bool monotone_envelope = false;
};

SurfaceGrid roc_surface(const Dataset& dataset, const EstimatorSpec& spec,
                        const GridSpec& grid);

void write_surface_csv(const SurfaceGrid& grid, std::ostream& out);

}  // namespace rocsurf

#endif
