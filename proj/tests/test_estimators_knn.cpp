#include "doctest.h"

#include <cmath>
#include <vector>

#include "rocsurf/estimators_knn.hpp"
#include "rocsurf/neighbors.hpp"
#include "rocsurf/rng.hpp"
#include "rocsurf/types.hpp"

#include "oracles.hpp"

using rocsurf::complete_data_moments;
using rocsurf::complete_data_tcf;
using rocsurf::CutPair;
using rocsurf::Dataset;
using rocsurf::estimate_moments;
using rocsurf::estimate_tcf_knn;
using rocsurf::impute_rho;
using rocsurf::Metric;
using rocsurf::MomentSet;
using rocsurf::numerical_error;
using rocsurf::parse_metric;
using rocsurf::Rng;
using rocsurf::TcfEstimate;
using rocsurf::Triple;
using rocsurf::Unit;
using rocsurf::validation_error;

namespace {

Dataset make_dataset(const std::vector<double>& ts, const std::vector<int>& ds,
                     const std::vector<int>& vs) {
  Dataset dataset;
  dataset.p = 1;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    Unit u;
    u.t = ts[i];
    u.a = {0.5 * ts[i] - 1.0};
    u.v = vs[i];
    u.d = vs[i] == 1 ? ds[i] : 0;
    dataset.units.push_back(u);
  }
  return dataset;
}

// Random dataset guaranteed to hold several verified units per class.
Dataset random_mixed(Rng& rng, std::size_t n, double verified_prob) {
  Dataset dataset;
  dataset.p = 1;
  for (std::size_t i = 0; i < n; ++i) {
    Unit u;
    const int d = static_cast<int>(rng.categorical({0.4, 0.35, 0.25})) + 1;
    u.t = rng.normal() + 2.0 * d;
    u.a = {rng.normal() + d};
    u.v = i < 6 ? 1 : (rng.bernoulli(verified_prob) ? 1 : 0);
    u.d = u.v == 1 ? d : 0;
    if (i < 6) u.d = static_cast<int>(i % 3) + 1;
    dataset.units.push_back(u);
  }
  return dataset;
}

}  // namespace

TEST_CASE("complete-data tcf on perfectly separated classes") {
  const Dataset d = make_dataset({1.0, 3.0, 5.0}, {1, 2, 3}, {1, 1, 1});
  const TcfEstimate est = complete_data_tcf(d, CutPair{2.0, 4.0});
  CHECK(est.tcf == Triple{1.0, 1.0, 1.0});
  CHECK_FALSE(est.out_of_range);
}

TEST_CASE("complete-data tcf with all test values tied") {
  const Dataset d = make_dataset({3.0, 3.0, 3.0}, {1, 2, 3}, {1, 1, 1});
  const TcfEstimate est = complete_data_tcf(d, CutPair{2.0, 4.0});
  CHECK(est.tcf == Triple{0.0, 1.0, 0.0});
}

TEST_CASE("complete-data tcf rejects unverified units and empty classes") {
  Dataset d = make_dataset({1.0, 3.0, 5.0}, {1, 2, 3}, {1, 1, 0});
  CHECK_THROWS_AS(complete_data_tcf(d, CutPair{2.0, 4.0}), validation_error);
  const Dataset two_classes =
      make_dataset({1.0, 3.0, 5.0}, {1, 2, 2}, {1, 1, 1});
  CHECK_THROWS_AS(complete_data_tcf(two_classes, CutPair{2.0, 4.0}),
                  numerical_error);
}

TEST_CASE("complete-data tcf equals direct frequency counts") {
  Rng rng(61);
  for (int trial = 0; trial < 10; ++trial) {
    const Dataset d = random_mixed(rng, 60, 1.0);
    const CutPair cut{3.0, 5.5};
    const TcfEstimate est = complete_data_tcf(d, cut);
    int n_k[3] = {0, 0, 0};
    int below_c1[3] = {0, 0, 0};
    int middle[3] = {0, 0, 0};
    int above_c2[3] = {0, 0, 0};
    for (const auto& u : d.units) {
      const int k = u.d - 1;
      ++n_k[k];
      if (u.t < cut.c1) ++below_c1[k];
      if (u.t >= cut.c1 && u.t < cut.c2) ++middle[k];
      if (u.t >= cut.c2) ++above_c2[k];
    }
    CHECK(est.tcf[0] ==
          doctest::Approx(below_c1[0] / static_cast<double>(n_k[0])).epsilon(1e-15));
    CHECK(est.tcf[1] ==
          doctest::Approx(middle[1] / static_cast<double>(n_k[1])).epsilon(1e-15));
    CHECK(est.tcf[2] ==
          doctest::Approx(above_c2[2] / static_cast<double>(n_k[2])).epsilon(1e-15));
  }
}

TEST_CASE("moments on fully verified data are exact class fractions") {
  const Dataset d = make_dataset({1.0, 2.0, 3.0, 4.0, 5.0, 6.0},
                                 {1, 1, 2, 2, 2, 3}, {1, 1, 1, 1, 1, 1});
  const Metric euclid = parse_metric("euclidean");
  const MomentSet m = estimate_moments(d, 1, euclid, CutPair{2.5, 4.5});
  CHECK(m.theta[0] == doctest::Approx(2.0 / 6.0).epsilon(1e-15));
  CHECK(m.theta[1] == doctest::Approx(3.0 / 6.0).epsilon(1e-15));
  CHECK(m.theta[2] == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
}

TEST_CASE("moment identities hold on random mixed data") {
  Rng rng(67);
  const Metric euclid = parse_metric("euclidean");
  for (int trial = 0; trial < 10; ++trial) {
    const Dataset d = random_mixed(rng, 50, 0.6);
    const CutPair cut{4.0, 6.0};
    const MomentSet m = estimate_moments(d, 3, euclid, cut);
    CHECK(m.theta[0] + m.theta[1] + m.theta[2] ==
          doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t k = 0; k < 3; ++k) {
      for (std::size_t j = 0; j < 2; ++j) {
        CHECK(m.gamma[j][k] ==
              doctest::Approx(m.theta[k] - m.beta[j][k]).epsilon(1e-12));
        CHECK(m.beta[j][k] >= 0.0);
        CHECK(m.beta[j][k] <= m.theta[k] + 1e-15);
      }
      CHECK(m.beta[1][k] <= m.beta[0][k] + 1e-15);
    }
  }
}

TEST_CASE("moments match the literal summation oracle") {
  Rng rng(71);
  const Metric euclid = parse_metric("euclidean");
  for (int trial = 0; trial < 5; ++trial) {
    const Dataset d = random_mixed(rng, 40, 0.5);
    const CutPair cut{3.5, 6.5};
    for (std::size_t k : {std::size_t{1}, std::size_t{3}}) {
      const auto rho = impute_rho(d, k, euclid);
      const MomentSet got = estimate_moments(d, rho, cut);
      const MomentSet want = oracles::moments_literal(d, rho, cut);
      for (std::size_t kk = 0; kk < 3; ++kk) {
        CHECK(got.theta[kk] == want.theta[kk]);
        for (std::size_t j = 0; j < 2; ++j) {
          CHECK(got.beta[j][kk] == want.beta[j][kk]);
          CHECK(got.gamma[j][kk] == want.gamma[j][kk]);
        }
      }
    }
  }
}

TEST_CASE("extreme first cut saturates the beta moments") {
  Rng rng(73);
  const Dataset d = random_mixed(rng, 30, 0.7);
  const Metric euclid = parse_metric("euclidean");
  const MomentSet m = estimate_moments(d, 2, euclid, CutPair{-100.0, 5.0});
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(m.beta[0][k] == m.theta[k]);
    CHECK(m.gamma[0][k] == 0.0);
  }
}

TEST_CASE("knn estimator reduces to the complete-data estimator when fully verified") {
  Rng rng(79);
  const Metric euclid = parse_metric("euclidean");
  for (int trial = 0; trial < 5; ++trial) {
    const Dataset d = random_mixed(rng, 30, 1.0);
    const CutPair cut{3.0, 6.0};
    const TcfEstimate complete = complete_data_tcf(d, cut);
    for (std::size_t k : {std::size_t{1}, std::size_t{3}, std::size_t{5}}) {
      const TcfEstimate knn = estimate_tcf_knn(d, k, euclid, cut);
      CHECK(knn.tcf[0] == complete.tcf[0]);
      CHECK(knn.tcf[1] == complete.tcf[1]);
      CHECK(knn.tcf[2] == complete.tcf[2]);
    }
  }
}

TEST_CASE("knn tcf stays in the unit cube") {
  Rng rng(83);
  const Metric euclid = parse_metric("euclidean");
  for (int trial = 0; trial < 10; ++trial) {
    const Dataset d = random_mixed(rng, 45, 0.5);
    const TcfEstimate est = estimate_tcf_knn(d, 3, euclid, CutPair{3.0, 6.5});
    for (double v : est.tcf) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK_FALSE(est.out_of_range);
  }
}

TEST_CASE("knn tcf is monotone in the cut points") {
  Rng rng(89);
  const Metric euclid = parse_metric("euclidean");
  const Dataset d = random_mixed(rng, 60, 0.6);
  const auto rho = impute_rho(d, 3, euclid);
  // c1 rises with c2 fixed: TCF1 nondecreasing.
  double prev_tcf1 = -1.0;
  for (double c1 : {1.0, 2.5, 4.0, 5.5}) {
    const TcfEstimate est = estimate_tcf_knn(d, rho, CutPair{c1, 9.0});
    CHECK(est.tcf[0] >= prev_tcf1);
    prev_tcf1 = est.tcf[0];
  }
  // c2 rises with c1 fixed: TCF3 nonincreasing.
  double prev_tcf3 = 2.0;
  for (double c2 : {2.0, 3.5, 5.0, 7.0}) {
    const TcfEstimate est = estimate_tcf_knn(d, rho, CutPair{1.0, c2});
    CHECK(est.tcf[2] <= prev_tcf3);
    prev_tcf3 = est.tcf[2];
  }
}

TEST_CASE("degenerate cuts hit the corners") {
  Rng rng(97);
  const Metric euclid = parse_metric("euclidean");
  const Dataset d = random_mixed(rng, 30, 0.7);
  double t_min = d.units[0].t;
  double t_max = d.units[0].t;
  for (const auto& u : d.units) {
    t_min = std::min(t_min, u.t);
    t_max = std::max(t_max, u.t);
  }
  const TcfEstimate low = estimate_tcf_knn(d, 2, euclid, CutPair{t_min - 1.0, t_max + 1.0});
  CHECK(low.tcf[0] == 0.0);
  CHECK(low.tcf[2] == 0.0);
  CHECK(low.tcf[1] == 1.0);
}

TEST_CASE("knn tcf is permutation invariant without ties") {
  Rng rng(101);
  const Metric euclid = parse_metric("euclidean");
  const Dataset d = random_mixed(rng, 25, 0.6);
  Dataset reversed;
  reversed.p = d.p;
  for (std::size_t i = d.n(); i > 0; --i) reversed.units.push_back(d.units[i - 1]);
  const CutPair cut{3.0, 6.0};
  const TcfEstimate a = estimate_tcf_knn(d, 3, euclid, cut);
  const TcfEstimate b = estimate_tcf_knn(reversed, 3, euclid, cut);
  CHECK(a.tcf[0] == doctest::Approx(b.tcf[0]).epsilon(1e-15));
  CHECK(a.tcf[1] == doctest::Approx(b.tcf[1]).epsilon(1e-15));
  CHECK(a.tcf[2] == doctest::Approx(b.tcf[2]).epsilon(1e-15));
}

TEST_CASE("knn estimator names the class with zero mass") {
  // Verified labels only in classes 1 and 2, so class 3 never receives
  // mass from labels or imputations.
  const Dataset d = make_dataset({1.0, 2.0, 3.0, 4.0, 5.0}, {1, 2, 1, 2, 0},
                                 {1, 1, 1, 1, 0});
  const Metric euclid = parse_metric("euclidean");
  try {
    estimate_tcf_knn(d, 2, euclid, CutPair{2.5, 4.5});
    FAIL("expected numerical_error");
  } catch (const numerical_error& e) {
    CHECK(std::string(e.what()).find("class 3") != std::string::npos);
  }
}

TEST_CASE("complete-data moments carry k = 0") {
  const Dataset d = make_dataset({1.0, 3.0, 5.0}, {1, 2, 3}, {1, 1, 1});
  const MomentSet m = complete_data_moments(d, CutPair{2.0, 4.0});
  CHECK(m.k == 0);
  CHECK(m.theta[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}
