#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace zsl {

/// Derives an independent 64-bit seed for a named component, so that
/// adding draws to one component never shifts another component's stream.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view component,
                          std::uint64_t index = 0);

/// Named random stream. Every draw is defined in terms of raw mt19937_64
/// output so trajectories do not depend on the standard library's
/// distribution implementations.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::string_view component);

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Unbiased integer on [0, n). n must be positive.
  std::size_t index(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace zsl
