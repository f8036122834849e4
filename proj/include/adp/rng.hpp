#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace adp {

/// Seeded RNG with explicit bounded draws. mt19937_64 output is pinned by the
/// standard; the distribution helpers here avoid std::uniform_int_distribution,
/// whose mapping is implementation-defined and would break byte-identical
/// determinism contracts across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform draw in [0, bound), bound >= 1. Rejection-sampled, no modulo bias.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - max % bound;
    std::uint64_t draw = engine_();
    while (draw >= limit) draw = engine_();
    return draw % bound;
  }

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  /// n distinct indices from [0, population), returned in ascending order.
  std::vector<std::size_t> sample_indices(std::size_t population, std::size_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace adp
