#include "rocsurf/rng.hpp"

#include "rocsurf/math.hpp"
#include "rocsurf/types.hpp"

namespace rocsurf {

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  // Shift into the open interval so the quantile is always finite.
  const double u = (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  return normal_quantile(u);
}

bool Rng::bernoulli(double prob) {
  if (!(prob >= 0.0 && prob <= 1.0)) {
    throw validation_error("bernoulli probability outside [0,1]");
  }
  return uniform() < prob;
}

std::size_t Rng::categorical(const std::vector<double>& probs) {
  if (probs.empty()) throw validation_error("categorical needs probabilities");
  const double u = uniform();
  double cum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] >= 0.0)) {
      throw validation_error("categorical probabilities must be nonnegative");
    }
    cum += probs[i];
    if (u < cum) return i;
  }
  return probs.size() - 1;
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw validation_error("below() requires bound >= 1");
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = engine_();
    if (r >= threshold) return r % bound;
  }
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + (stream + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace rocsurf
