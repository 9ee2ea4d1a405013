#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace jeo {

// mt19937_64 is fully specified by the standard, but the std distributions
// are not; the mappings below keep streams bit-reproducible everywhere.
class Rng {
public:
  explicit Rng(uint64_t seed) : gen_(mix(seed)) {}
  Rng(uint64_t seed, uint64_t stream) : gen_(mix(mix(seed) + 0x9e3779b97f4a7c15ULL * (stream + 1))) {}

  uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi) {
    const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(gen_() % span);
  }

  /// Standard normal via Box-Muller.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  static uint64_t mix(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// Independent sub-seed for (seed, index, tag) triples.
inline uint64_t derive_seed(uint64_t seed, uint64_t index, uint64_t tag = 0) {
  return Rng::mix(Rng::mix(seed) + 0x9e3779b97f4a7c15ULL * index + tag);
}

}  // namespace jeo
