#pragma once

#include <cstdint>
#include <random>

#include "refract/linalg.hpp"

namespace refract {

/// Deterministic RNG. Distributions are built from the raw 64-bit stream
/// directly so that a fixed seed gives identical samples on every platform
/// (std:: distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  double normal() {
    // Box-Muller, one value per call (second discarded for determinism clarity)
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  Vec unit_vector(int n) {
    Vec v(n);
    double r = 0.0;
    while (r < 1e-8) {
      for (int i = 0; i < n; ++i) v[i] = normal();
      r = norm(v);
    }
    return (1.0 / r) * v;
  }

  /// Uniform over the ball of radius r (rejection from the cube).
  Vec in_ball(int n, double r) {
    Vec v(n);
    for (;;) {
      for (int i = 0; i < n; ++i) v[i] = uniform(-1.0, 1.0);
      if (dot(v, v) <= 1.0) return r * v;
    }
  }

  Mat symmetric(int n, double scale) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double v = uniform(-scale, scale);
        m(i, j) = v;
        m(j, i) = v;
      }
    return m;
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace refract
