#ifndef ROCSURF_TYPES_HPP
#define ROCSURF_TYPES_HPP

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rocsurf {

using Triple = std::array<double, 3>;
using Matrix3 = std::array<std::array<double, 3>, 3>;
using Matrix6 = std::array<std::array<double, 6>, 6>;

// Input contract violations: bad files, bad flags, impossible requests.
class validation_error : public std::runtime_error {
 public:
  explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

// Failures of the numerics themselves: singular matrices, negative
// variance plug-ins, empty-class denominators.
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

// One study subject. d = 0 encodes "no verified label" and is legal only
// with v = 0.
struct Unit {
  double t = 0.0;
  std::vector<double> a;
  int v = 0;
  int d = 0;
};

struct Dataset {
  std::vector<Unit> units;
  std::size_t p = 0;

  std::size_t n() const { return units.size(); }
  std::size_t verified_count() const {
    std::size_t m = 0;
    for (const auto& u : units) m += static_cast<std::size_t>(u.v);
    return m;
  }
  bool fully_verified() const { return verified_count() == n(); }
};

struct CutPair {
  double c1 = 0.0;
  double c2 = 0.0;
};

// Throws validation_error unless c1 < c2 strictly.
void check_cut(const CutPair& cut);

enum class EstimatorKind { COMPLETE, FI, MSI, IPW, SPE, KNN };

std::string estimator_name(EstimatorKind kind);

struct TcfEstimate {
  Triple tcf{0.0, 0.0, 0.0};
  CutPair cut;
  EstimatorKind estimator = EstimatorKind::COMPLETE;
  // Neighborhood size; meaningful for KNN only.
  int k = 0;
  // Covariance of the triple on the finite-sample scale (already divided
  // by n), when a variance method was requested.
  std::optional<Matrix3> covariance;
  bool out_of_range = false;
};

}  // namespace rocsurf

#endif
