#ifndef OPTLAB_RNG_HPP
#define OPTLAB_RNG_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace optlab {

// Deterministic splittable random stream. A stream is identified by
// (seed, label); the label is a path-like string so that independent
// consumers derive their own substreams, e.g. rng.sub("worker/3").
// The same (seed, label) always yields the same sample sequence; all
// sampling routines below are implemented explicitly so results do not
// depend on the standard library's distribution internals.
class RngStream {
 public:
  explicit RngStream(uint64_t seed, std::string_view label = "");

  // Derives an independent stream labeled "<this label>/<label>".
  RngStream sub(std::string_view label) const;

  uint64_t next_u64();
  double uniform();                    // [0, 1), 53-bit mantissa
  double normal();                     // standard Gaussian (Box-Muller)
  uint64_t below(uint64_t bound);      // uniform on {0, ..., bound-1}
  int index(int n) { return static_cast<int>(below(static_cast<uint64_t>(n))); }
  std::vector<int> permutation(int n); // Fisher-Yates

  uint64_t seed() const { return seed_; }
  const std::string& label() const { return label_; }

 private:
  uint64_t state_[4];  // xoshiro256++
  uint64_t seed_ = 0;
  std::string label_;
  double spare_normal_ = 0.0;
  bool have_spare_ = false;
};

// Inverse-CDF draw from a categorical distribution; probabilities must be
// nonnegative and sum to 1 (validated to 1e-9).
int sample_categorical(RngStream& rng, const std::vector<double>& probs);

}  // namespace optlab

#endif
