#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace tgode {

/// Seeded random generator with a pinned mapping from raw 64-bit draws to
/// doubles, so that results do not depend on the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  /// Uniform in [0, 1) with 53 bits of randomness.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform in [a, b).
  double uniform(double a, double b);

  /// Unbiased uniform integer in [0, n); n must be positive.
  std::int64_t uniform_int(std::int64_t n);

  /// Standard normal (Box-Muller; values are produced in pairs).
  double normal();

  /// k distinct values from {0, ..., n-1}, in selection order.
  std::vector<std::int64_t> sample_distinct(std::int64_t n, std::int64_t k);

  /// Stream derivation: statistically independent child seed.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

 private:
  std::mt19937_64 gen_;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace tgode
