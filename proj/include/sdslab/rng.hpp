// Copyright 2026 The sdslab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sdslab {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Deterministic generator with a fully specified normal sampler (the
// distribution adapters in <random> are implementation-defined, which
// would break byte-identical reports across standard libraries).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via the polar method
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

  void fill_gaussian(double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = gaussian();
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Stateless per-(seed, pixel, sample) jitter in [0, 1); lets forward and
// backward render passes agree on sample placement without storing it.
inline double jitter_value(std::uint64_t seed, int px, int py, int sample) {
  std::uint64_t h = seed;
  h ^= static_cast<std::uint64_t>(px) * 0x9E3779B97F4A7C15ull;
  h ^= static_cast<std::uint64_t>(py) * 0xBF58476D1CE4E5B9ull;
  h ^= static_cast<std::uint64_t>(sample) * 0x94D049BB133111EBull;
  return static_cast<double>(splitmix64(h) >> 11) * 0x1.0p-53;
}

inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace sdslab
