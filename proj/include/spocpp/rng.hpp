/*
 * Copyright 2026 The spocpp authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "spocpp/error.hpp"

namespace spocpp {

// splitmix64 finalizer. All seed derivation in the project goes through this
// function so that runs are bit-reproducible with no hidden global state.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from (base, a, b), e.g. per
/// (grid index, replicate) in the experiment harness.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a,
                              std::uint64_t b) {
  return mix64(mix64(base ^ 0x6d9f1c7453a2e0b1ULL) + mix64(a) + 3 * mix64(b));
}

inline double u64_to_unit(std::uint64_t x) {
  // 53 random bits -> [0, 1)
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

/// Counter-based per-pair uniform variate keyed by (seed, min(i,j), max(i,j)).
/// Stateless, so samplers never materialize an n x n matrix of variates.
inline double pair_uniform(std::uint64_t seed, std::uint32_t i,
                           std::uint32_t j) {
  if (i > j) std::swap(i, j);
  std::uint64_t key = (static_cast<std::uint64_t>(i) << 32) |
                      static_cast<std::uint64_t>(j);
  return u64_to_unit(mix64(mix64(seed ^ 0x2545f4914f6cdd1dULL) + mix64(key)));
}

/// Small deterministic PRNG stream (splitmix64 sequence).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double uniform() { return u64_to_unit(next_u64()); }

  // Marsaglia polar method
  double normal() {
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
    double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

  // Marsaglia-Tsang; the alpha < 1 case boosts through Gamma(alpha + 1).
  double gamma(double alpha) {
    require(alpha > 0.0, ErrorCode::parameter, "gamma: alpha must be > 0");
    if (alpha < 1.0) {
      double u;
      do {
        u = uniform();
      } while (u == 0.0);
      return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
    }
    double d = alpha - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
        return d * v;
    }
  }

  std::vector<double> dirichlet(const std::vector<double>& alpha) {
    std::vector<double> g(alpha.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < alpha.size(); ++k) {
      g[k] = gamma(alpha[k]);
      sum += g[k];
    }
    for (double& x : g) x /= sum;
    return g;
  }

  /// Uniform integer in [0, n)
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace spocpp
