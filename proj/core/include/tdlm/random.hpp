#ifndef TDLM_RANDOM_HPP_
#define TDLM_RANDOM_HPP_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>
#include <string_view>

#include "tdlm/base.hpp"

TDLM_NAMESPACE_BEGIN

// Seeded generator threaded through initialisation, dropout, batch shuffling
// and sampling. Distributions are derived from raw 64-bit draws so results do
// not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  // A stream keyed by a seed plus any number of integer tags.
  static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);
  static Rng derive(std::uint64_t seed, std::string_view name);

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Rejection sampling, unbiased.
  std::uint64_t below(std::uint64_t n);

  bool bernoulli(double p) { return uniform() < p; }

  template <class It>
  void shuffle(It first, It last) {
    auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      auto j = below(i);
      std::swap(first[i - 1], first[j]);
    }
  }

  std::string serialize() const;
  static Rng deserialize(const std::string& state);

  bool operator==(const Rng& other) const { return engine_ == other.engine_; }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t fnv1a(std::string_view text);

TDLM_NAMESPACE_END

#endif  // TDLM_RANDOM_HPP_
