#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <vector>

#include "rocsurf/rng.hpp"

using rocsurf::derive_seed;
using rocsurf::Rng;

TEST_CASE("same seed reproduces the same stream") {
  Rng a(2024);
  Rng b(2024);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.uniform() == b.uniform());
  }
}

TEST_CASE("uniform stays in the half-open unit interval") {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("uniform moments at large n") {
  Rng rng(11);
  const int n = 200000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    sum += u;
    sum_sq += u * u;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  // 3 sigma of the mean of Uniform(0,1) at n = 2e5 is about 0.0019.
  CHECK(std::abs(mean - 0.5) < 0.002);
  CHECK(std::abs(var - 1.0 / 12.0) < 0.002);
}

TEST_CASE("normal moments at large n") {
  Rng rng(13);
  const int n = 200000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sum_sq += z * z;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("bernoulli frequency") {
  Rng rng(17);
  const int n = 100000;
  int ones = 0;
  for (int i = 0; i < n; ++i) ones += rng.bernoulli(0.3) ? 1 : 0;
  CHECK(std::abs(ones / static_cast<double>(n) - 0.3) < 0.006);
  Rng degenerate(19);
  for (int i = 0; i < 100; ++i) {
    CHECK_FALSE(degenerate.bernoulli(0.0));
    CHECK(degenerate.bernoulli(1.0));
  }
}

TEST_CASE("categorical frequencies") {
  Rng rng(23);
  const std::vector<double> probs{0.4, 0.35, 0.25};
  std::vector<int> counts(3, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[rng.categorical(probs)];
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(std::abs(counts[k] / static_cast<double>(n) - probs[k]) < 0.006);
  }
}

TEST_CASE("below respects the bound and covers it") {
  Rng rng(29);
  std::vector<int> seen(5, 0);
  for (int i = 0; i < 5000; ++i) {
    const std::uint64_t v = rng.below(5);
    REQUIRE(v < 5);
    ++seen[static_cast<std::size_t>(v)];
  }
  for (int c : seen) CHECK(c > 0);
  for (int i = 0; i < 100; ++i) CHECK(rng.below(1) == 0);
}

TEST_CASE("derive_seed separates streams") {
  const std::uint64_t master = 42;
  CHECK(derive_seed(master, 0) != derive_seed(master, 1));
  CHECK(derive_seed(master, 1) != derive_seed(master, 2));
  CHECK(derive_seed(master, 5) == derive_seed(master, 5));
  Rng a(derive_seed(master, 0));
  Rng b(derive_seed(master, 1));
  int equal = 0;
  for (int i = 0; i < 100; ++i) {
    if (a.uniform() == b.uniform()) ++equal;
  }
  CHECK(equal == 0);
}
