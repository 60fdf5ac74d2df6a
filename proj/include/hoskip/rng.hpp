#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace hoskip {

// splitmix64 finalizer; used to derive child stream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  return mix64(mix64(a) + b);
}

// Seeded random stream. Distribution draws are implemented here rather than
// with std::*_distribution so that sequences are identical across standard
// library implementations; the engine itself (mt19937_64) is fully specified.
//
// Streams are forkable: fork(k...) derives an independent child stream from
// (parent seed, keys) without consuming parent state, so draws can be keyed
// by (replication, sample index) and evaluated in any order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  std::uint64_t seed() const { return seed_; }

  Rng fork(std::uint64_t k0, std::uint64_t k1 = 0) const {
    return Rng(mix64(mix64(seed_ ^ 0x632be59bd9b4e019ULL, k0), k1));
  }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Exp(1) by inversion; log1p keeps small arguments accurate.
  double exponential() { return -std::log1p(-uniform()); }

  // Standard normal, Marsaglia polar method with the spare variate cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  // Zero-mean complex Gaussian with unit variance (E|g|^2 = 1).
  std::complex<double> complex_normal() {
    constexpr double kInvSqrt2 = 0.70710678118654752440;
    const double re = normal() * kInvSqrt2;
    const double im = normal() * kInvSqrt2;
    return {re, im};
  }

  // Exact Poisson draw: counts unit-rate arrivals within [0, mean].
  // O(mean) but free of the underflow that kills the product form.
  long poisson(double mean) {
    long k = -1;
    double acc = 0.0;
    while (acc <= mean) {
      acc += exponential();
      ++k;
    }
    return k;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace hoskip
