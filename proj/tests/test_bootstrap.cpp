#include "doctest.h"

#include <cstddef>

#include "rocsurf/bootstrap.hpp"
#include "rocsurf/estimators_knn.hpp"
#include "rocsurf/estimators_parametric.hpp"
#include "rocsurf/neighbors.hpp"
#include "rocsurf/rng.hpp"
#include "rocsurf/types.hpp"

using rocsurf::apply_estimator;
using rocsurf::bootstrap_covariance;
using rocsurf::BootstrapResult;
using rocsurf::complete_data_tcf;
using rocsurf::CutPair;
using rocsurf::Dataset;
using rocsurf::estimate_nuisance;
using rocsurf::estimate_tcf_fi;
using rocsurf::estimate_tcf_knn;
using rocsurf::EstimatorKind;
using rocsurf::EstimatorSpec;
using rocsurf::full_formula;
using rocsurf::numerical_error;
using rocsurf::parse_metric;
using rocsurf::Rng;
using rocsurf::TcfEstimate;
using rocsurf::Triple;
using rocsurf::Unit;
using rocsurf::validation_error;

namespace {

Dataset constant_dataset(std::size_t per_class) {
  Dataset dataset;
  dataset.p = 1;
  for (int d = 1; d <= 3; ++d) {
    for (std::size_t i = 0; i < per_class; ++i) {
      Unit u;
      u.t = 5.0;
      u.a = {0.5};
      u.v = 1;
      u.d = d;
      dataset.units.push_back(u);
    }
  }
  return dataset;
}

Dataset spread_dataset(std::size_t per_class) {
  Dataset dataset;
  dataset.p = 1;
  for (int d = 1; d <= 3; ++d) {
    for (std::size_t i = 0; i < per_class; ++i) {
      Unit u;
      u.t = 2.0 * d + 0.1 * static_cast<double>(i);
      u.a = {0.5 * u.t};
      u.v = 1;
      u.d = d;
      dataset.units.push_back(u);
    }
  }
  return dataset;
}

Dataset random_mixed(Rng& rng, std::size_t n) {
  Dataset dataset;
  dataset.p = 1;
  for (std::size_t i = 0; i < n; ++i) {
    Unit u;
    const int d = static_cast<int>(rng.categorical({0.4, 0.35, 0.25})) + 1;
    u.t = rng.normal() + 2.0 * d;
    u.a = {rng.normal() + d};
    u.v = i < 6 ? 1 : (rng.bernoulli(0.65) ? 1 : 0);
    u.d = u.v == 1 ? d : 0;
    if (i < 6) u.d = static_cast<int>(i % 3) + 1;
    dataset.units.push_back(u);
  }
  return dataset;
}

}  // namespace

TEST_CASE("degenerate test values give an exactly zero bootstrap covariance") {
  const Dataset d = constant_dataset(10);
  const CutPair cut{2.0, 7.0};
  EstimatorSpec spec;
  spec.kind = EstimatorKind::COMPLETE;
  const BootstrapResult res = bootstrap_covariance(d, spec, cut, 100, 31);
  CHECK(res.b == 100);
  CHECK(res.replicates.size() + res.failures == 100);
  for (const Triple& r : res.replicates) {
    CHECK(r == Triple{0.0, 1.0, 0.0});
  }
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(res.covariance[i][j] == 0.0);
    }
  }

  EstimatorSpec knn_spec;
  knn_spec.kind = EstimatorKind::KNN;
  knn_spec.k = 1;
  knn_spec.metric = parse_metric("euclidean");
  const BootstrapResult knn_res = bootstrap_covariance(d, knn_spec, cut, 50, 31);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(knn_res.covariance[i][j] == 0.0);
    }
  }
}

TEST_CASE("same seed reproduces the replicates bit for bit") {
  Rng rng(227);
  const Dataset d = random_mixed(rng, 50);
  EstimatorSpec spec;
  spec.kind = EstimatorKind::KNN;
  spec.k = 3;
  spec.metric = parse_metric("euclidean");
  const CutPair cut{3.0, 6.0};
  const BootstrapResult a = bootstrap_covariance(d, spec, cut, 40, 977);
  const BootstrapResult b = bootstrap_covariance(d, spec, cut, 40, 977);
  REQUIRE(a.replicates.size() == b.replicates.size());
  for (std::size_t r = 0; r < a.replicates.size(); ++r) {
    CHECK(a.replicates[r] == b.replicates[r]);
  }
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(a.covariance[i][j] == b.covariance[i][j]);
    }
  }
  const BootstrapResult c = bootstrap_covariance(d, spec, cut, 40, 978);
  bool any_differ = false;
  for (std::size_t r = 0; r < std::min(a.replicates.size(), c.replicates.size());
       ++r) {
    if (a.replicates[r] != c.replicates[r]) any_differ = true;
  }
  CHECK(any_differ);
}

TEST_CASE("bootstrap covariance is symmetric with a nonnegative diagonal") {
  Rng rng(229);
  const Dataset d = random_mixed(rng, 60);
  EstimatorSpec spec;
  spec.kind = EstimatorKind::KNN;
  spec.k = 1;
  spec.metric = parse_metric("euclidean");
  const BootstrapResult res =
      bootstrap_covariance(d, spec, CutPair{3.0, 6.0}, 60, 5);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(res.covariance[i][i] >= 0.0);
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(res.covariance[i][j] == res.covariance[j][i]);
    }
  }
}

TEST_CASE("a majority of failed replicates aborts the bootstrap") {
  const Dataset d = spread_dataset(1);
  EstimatorSpec spec;
  spec.kind = EstimatorKind::COMPLETE;
  CHECK_THROWS_AS(bootstrap_covariance(d, spec, CutPair{3.0, 5.0}, 40, 11),
                  numerical_error);
}

TEST_CASE("scattered failures are tolerated and counted") {
  const Dataset d = spread_dataset(3);
  EstimatorSpec spec;
  spec.kind = EstimatorKind::COMPLETE;
  const BootstrapResult res =
      bootstrap_covariance(d, spec, CutPair{3.0, 5.0}, 60, 17);
  CHECK(res.failures > 0);
  CHECK(res.failures * 2 <= 60);
  CHECK(res.replicates.size() == 60 - res.failures);
}

TEST_CASE("bootstrap input validation") {
  const Dataset d = constant_dataset(5);
  EstimatorSpec spec;
  spec.kind = EstimatorKind::COMPLETE;
  CHECK_THROWS_AS(bootstrap_covariance(d, spec, CutPair{2.0, 7.0}, 1, 3),
                  validation_error);
  CHECK_THROWS_AS(bootstrap_covariance(Dataset{}, spec, CutPair{2.0, 7.0}, 10, 3),
                  validation_error);
  CHECK_THROWS_AS(bootstrap_covariance(d, spec, CutPair{7.0, 2.0}, 10, 3),
                  validation_error);
}

TEST_CASE("apply_estimator dispatches to each estimator") {
  Rng rng(233);
  const Dataset mixed = random_mixed(rng, 70);
  const CutPair cut{3.0, 6.0};

  EstimatorSpec knn;
  knn.kind = EstimatorKind::KNN;
  knn.k = 3;
  knn.metric = parse_metric("euclidean");
  const TcfEstimate via_spec = apply_estimator(mixed, knn, cut);
  const TcfEstimate direct = estimate_tcf_knn(mixed, 3, knn.metric, cut);
  CHECK(via_spec.tcf == direct.tcf);
  CHECK(via_spec.estimator == EstimatorKind::KNN);

  const Dataset full = spread_dataset(4);
  EstimatorSpec complete;
  complete.kind = EstimatorKind::COMPLETE;
  CHECK(apply_estimator(full, complete, cut).tcf ==
        complete_data_tcf(full, cut).tcf);

  EstimatorSpec fi;
  fi.kind = EstimatorKind::FI;
  const TcfEstimate fi_spec = apply_estimator(mixed, fi, cut);
  const auto nuisance =
      estimate_nuisance(mixed, full_formula(mixed.p), full_formula(mixed.p));
  CHECK(fi_spec.tcf == estimate_tcf_fi(mixed, nuisance, cut).tcf);
  CHECK(fi_spec.estimator == EstimatorKind::FI);

  for (EstimatorKind kind :
       {EstimatorKind::MSI, EstimatorKind::IPW, EstimatorKind::SPE}) {
    EstimatorSpec spec;
    spec.kind = kind;
    const TcfEstimate est = apply_estimator(mixed, spec, cut);
    CHECK(est.estimator == kind);
    CHECK(std::isfinite(est.tcf[0]));
    CHECK(std::isfinite(est.tcf[1]));
    CHECK(std::isfinite(est.tcf[2]));
  }
}
