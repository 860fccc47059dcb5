#include "optlab/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace optlab {

namespace {

uint64_t splitmix64(uint64_t& s) {
  uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

RngStream::RngStream(uint64_t seed, std::string_view label)
    : seed_(seed), label_(label) {
  uint64_t s = seed ^ fnv1a64(label_);
  for (auto& w : state_) w = splitmix64(s);
}

RngStream RngStream::sub(std::string_view label) const {
  std::string child = label_.empty() ? std::string(label)
                                     : label_ + "/" + std::string(label);
  return RngStream(seed_, child);
}

uint64_t RngStream::next_u64() {
  // xoshiro256++ step
  uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_normal_;
  }
  double u1 = uniform(), u2 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 6.283185307179586476925286766559 * u2;
  spare_normal_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

uint64_t RngStream::below(uint64_t bound) {
  if (bound <= 1) return 0;
  // rejection sampling on the top range to avoid modulo bias
  uint64_t threshold = (0ULL - bound) % bound;
  for (;;) {
    uint64_t r = next_u64();
    if (r >= threshold) return r % bound;
  }
}

std::vector<int> RngStream::permutation(int n) {
  std::vector<int> p(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) p[static_cast<size_t>(i)] = i;
  for (int i = n - 1; i > 0; --i) {
    int j = static_cast<int>(below(static_cast<uint64_t>(i + 1)));
    std::swap(p[static_cast<size_t>(i)], p[static_cast<size_t>(j)]);
  }
  return p;
}

int sample_categorical(RngStream& rng, const std::vector<double>& probs) {
  double total = 0.0;
  for (double p : probs) total += p;
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("categorical probabilities must sum to 1");
  const double u = rng.uniform();
  double acc = 0.0;
  for (size_t j = 0; j < probs.size(); ++j) {
    acc += probs[j];
    if (u < acc) {
      if (probs[j] <= 0.0)
        throw std::invalid_argument("sampled a zero-probability category");
      return static_cast<int>(j);
    }
  }
  // u landed in the rounding slack at the top; return the last positive entry
  for (size_t j = probs.size(); j-- > 0;)
    if (probs[j] > 0.0) return static_cast<int>(j);
  throw std::invalid_argument("categorical distribution has no mass");
}

}  // namespace optlab
