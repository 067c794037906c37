// Copyright 2026 The hvqe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace hvqe {

using Complex = std::complex<double>;
using Mask = std::uint64_t;

inline constexpr double kPi = 3.14159265358979323846;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: malformed geometry, mismatched sizes, bad configuration.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// The requested computation is too large for the configured limits.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// A well-posed request that has no answer under the chosen strategy.
class ComputationError : public Error {
 public:
  using Error::Error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

inline int popcount(Mask m) { return std::popcount(m); }

inline bool bit(Mask m, int q) { return (m >> q) & 1u; }

// Mask with bits lo..hi-1 set (empty when hi <= lo).
inline Mask range_mask(int lo, int hi) {
  if (hi <= lo) return 0;
  const Mask upper = hi >= 64 ? ~Mask{0} : ((Mask{1} << hi) - 1);
  return upper & ~((Mask{1} << lo) - 1);
}

inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
  return r;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Seedable deterministic stream. uniform() is built from raw engine output so
// results do not depend on the standard library's distribution code.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed = 0) : seed_(seed), engine_(splitmix64(seed)) {}

  std::uint64_t seed() const { return seed_; }

  // Independent stream for a sub-task; depends only on (seed, stream).
  RandomSource spawn(std::uint64_t stream) const {
    return RandomSource(splitmix64(seed_ ^ splitmix64(stream + 0x632be59bd9b4e019ull)));
  }

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw InvalidArgument("RandomSource::below: empty range");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  int sign() { return (engine_() >> 63) ? 1 : -1; }

  std::uint64_t binomial(std::uint64_t n, double p) {
    if (n == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    std::binomial_distribution<std::uint64_t> dist(n, p);
    return dist(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace hvqe
