#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace soda {

/// SplitMix64 finalizer; used to derive independent child seeds.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seeded random stream that can be split into statistically independent
/// children keyed by label or index. A child depends only on the parent
/// key and the split key, never on how much the parent has been consumed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix64(seed)), gen_(key_) {}

  [[nodiscard]] Rng split(std::uint64_t k) const { return Rng(key_, mix64(k ^ 0xA5A5A5A5A5A5A5A5ULL)); }
  [[nodiscard]] Rng split(std::string_view label) const {
    std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a
    for (const char c : label) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001B3ULL;
    }
    return Rng(key_, h);
  }

  std::mt19937_64& engine() { return gen_; }

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  double normal(double mean = 0.0, double sd = 1.0) {
    return std::normal_distribution<double>(mean, sd)(gen_);
  }
  bool bernoulli(double p) { return uniform() < p; }
  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    return std::poisson_distribution<std::uint64_t>(mean)(gen_);
  }

  /// Gamma(shape, 1) by Marsaglia-Tsang; shape < 1 via the boost
  /// Gamma(shape+1) * U^(1/shape).
  double gamma(double shape);
  /// Beta(a, b) as X/(X+Y) with X ~ Gamma(a), Y ~ Gamma(b).
  double beta(double a, double b);

 private:
  Rng(std::uint64_t parent, std::uint64_t salt) : key_(mix64(parent ^ salt)), gen_(key_) {}

  std::uint64_t key_;
  std::mt19937_64 gen_;
};

}  // namespace soda
