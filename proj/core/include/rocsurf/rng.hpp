#ifndef ROCSURF_RNG_HPP
#define ROCSURF_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace rocsurf {

// Deterministic random source with platform-stable output. The standard
// distribution objects are implementation-defined, so uniform, normal and
// discrete draws are implemented here on top of raw mt19937_64 words.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform();

  // Standard normal via inverse-CDF transform.
  double normal();

  bool bernoulli(double prob);

  // Index in [0, probs.size()) from a probability vector summing to 1.
  std::size_t categorical(const std::vector<double>& probs);

  // Uniform integer in [0, bound); bound >= 1.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

// Derives an independent stream seed from a master seed and a stream
// index via splitmix64; used for per-replicate reproducibility.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace rocsurf

#endif
