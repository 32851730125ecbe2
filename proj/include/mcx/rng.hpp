#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "mcx/numkit.hpp"

namespace mcx {

// Seeded generator with platform-independent draws: std::mt19937_64 is fully
// specified, but the std distributions are not, so the transforms live here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int uniform_int(int lo, int hi_exclusive) {
    return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi_exclusive - lo));
  }

  // Box-Muller; the second variate is discarded to keep the stream stateless.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  Vec normal_vec(int n) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  Vec unit_vec(int n) {
    for (;;) {
      Vec v = normal_vec(n);
      const double len = v.norm();
      if (len > 1e-12) return v / len;
    }
  }

  // Derives an independent child seed, e.g. one per worker or per sample.
  std::uint64_t fork() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mcx
