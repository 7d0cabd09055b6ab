#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace alertcast {

// Deterministic random helpers. std::*_distribution output is
// implementation-defined, so every draw here is built directly on the
// portable mt19937_64 bit stream; results are stable across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1)
  double u01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // uniform in (0, 1], safe as a log() argument
  double u01_open() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

  // uniform integer in [0, n)
  std::uint64_t bounded(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(engine_()) * n) >> 64);
  }

  double normal(double mean = 0.0, double stddev = 1.0) {
    if (has_spare_) {
      has_spare_ = false;
      return mean + stddev * spare_;
    }
    double u = u01_open();
    double v = u01();
    double r = std::sqrt(-2.0 * std::log(u));
    spare_ = r * std::sin(2.0 * M_PI * v);
    has_spare_ = true;
    return mean + stddev * r * std::cos(2.0 * M_PI * v);
  }

  // median exp(mu), sigma_ln in log space
  double lognormal(double mu, double sigma_ln) { return std::exp(normal(mu, sigma_ln)); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// splitmix64 finalizer, used to derive independent per-item seeds
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace alertcast
