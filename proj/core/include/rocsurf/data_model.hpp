#ifndef ROCSURF_DATA_MODEL_HPP
#define ROCSURF_DATA_MODEL_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rocsurf/types.hpp"

namespace rocsurf {

// Reads the CSV schema t,a1..ap,v,d. Header row is mandatory; the d cell
// is empty exactly where v = 0. Errors carry 1-based row numbers counting
// the header, so the first data row is row 2.
Dataset load_dataset(std::istream& in);
Dataset load_dataset_file(const std::string& path);

// Writes the same schema; numbers round-trip bit-exactly.
void serialize_dataset(const Dataset& dataset, std::ostream& out);

struct ValidationReport {
  std::array<std::size_t, 3> verified_per_class{0, 0, 0};
  std::size_t n = 0;
  std::size_t n_verified = 0;
  double verification_rate = 0.0;
  std::vector<std::string> warnings;
};

ValidationReport validate(const Dataset& dataset, const CutPair& cut);

// Bernoulli selection probability of the form
//   b0 + c1*I(x1 > thr1) + c2*I(x2 > thr2) + ...
// where each x names the test result t or a covariate a1..ap.
struct SubsampleTerm {
  // -1 selects t, otherwise the 0-based covariate index.
  int variable = -1;
  double threshold = 0.0;
  double coefficient = 0.0;
};

struct SubsampleRule {
  double base = 0.0;
  std::vector<SubsampleTerm> terms;

  double probability(const Unit& unit) const;
};

// Grammar: "b0 + c*I(var>thr) [+ ...]" with var in {t, a1..ap}.
SubsampleRule parse_subsample_rule(const std::string& text);

// Resamples verification status per the rule on a fully verified dataset,
// blanking labels where v becomes 0. Errors if any unit's selection
// probability leaves [0, 1].
Dataset subsample_verification(const Dataset& dataset, const SubsampleRule& rule,
                               std::uint64_t seed);

}  // namespace rocsurf

#endif
