#ifndef OPTLAB_CHECKS_HPP
#define OPTLAB_CHECKS_HPP

#include <string>
#include <vector>

namespace optlab {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// The property suites behind `check invariants`: gradient/finite-difference
// agreement, prox firm nonexpansiveness and contraction, permutation
// statistics, quantization moments, estimator unbiasedness, dual-state
// consistency, spectra, round-trips, determinism. Runs in well under two
// minutes.
std::vector<CheckResult> run_invariant_checks();

}  // namespace optlab

#endif
