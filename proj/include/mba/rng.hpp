#pragma once

// Counter-based random stream.
//
// Output k (k = 1, 2, ...) of a stream with key K is mix64(K + k * 0x9E3779B97F4A7C15),
// where mix64 is the SplitMix64 finalizer. Streams for independent trials are
// keyed by mix64(seed ^ mix64(index + 0xD1B54A32D192ED03)). The sequence is
// fully specified here so results are bit-identical across platforms.

#include <cstdint>
#include <span>
#include <stdexcept>

#include "mba/rational.hpp"

namespace mba {

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class CounterRng {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit CounterRng(std::uint64_t key = 0) : key_(key) {}

  /// Independent stream for trial `index` under `seed`.
  static CounterRng stream(std::uint64_t seed, std::uint64_t index) {
    return CounterRng(mix64(seed ^ mix64(index + 0xD1B54A32D192ED03ULL)));
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next() {
    ++counter_;
    return mix64(key_ + counter_ * kGamma);
  }

  /// Uniform integer in [0, bound) by rejection (no modulo bias).
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("below(0)");
    std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    for (;;) {
      std::uint64_t u = next();
      if (u < limit) return u % bound;
    }
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// True with probability ceil(p * 2^64) / 2^64 for p in [0, 1]; the draw u is
  /// compared exactly against p as u < p * 2^64.
  bool bernoulli(const Rational& p) {
    std::uint64_t u = next();
    return below_threshold(u, p);
  }

  /// Index k drawn with probability weights[k] / sum(weights) (weights >= 0,
  /// sum > 0). One 64-bit draw, compared exactly against cumulative sums.
  std::size_t pick(std::span<const Rational> weights) {
    Rational total;
    for (const auto& w : weights) total += w;
    if (total.sign() <= 0) throw std::invalid_argument("pick: non-positive total weight");
    std::uint64_t u = next();
    mpq_class point = mpq_class(mpz_class(std::to_string(u))) / mpq_class(mpz_class(1) << 64) * total.to_mpq();
    Rational cumulative;
    std::size_t last_positive = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
      if (weights[k].sign() <= 0) continue;
      last_positive = k;
      cumulative += weights[k];
      if (point < cumulative.to_mpq()) return k;
    }
    return last_positive;
  }

  static bool below_threshold(std::uint64_t u, const Rational& p) {
    if (p.sign() <= 0) return false;
    if (p >= Rational(1)) return true;
    // u < p * 2^64  <=>  u * den < num * 2^64
    if (!p.is_big()) {
      using U = unsigned __int128;
      U lhs = static_cast<U>(u) * static_cast<std::uint64_t>(p.small_den());
      U rhs = static_cast<U>(static_cast<std::uint64_t>(p.small_num())) << 64;
      return lhs < rhs;
    }
    mpz_class lhs = mpz_class(std::to_string(u)) * p.denominator();
    mpz_class rhs = p.numerator() << 64;
    return lhs < rhs;
  }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace mba
