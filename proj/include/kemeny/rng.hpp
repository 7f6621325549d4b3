#pragma once

#include <bit>
#include <cmath>
#include <cstdint>

namespace kemeny::rng {

/// SplitMix64 step; used for seeding and stream derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// xoshiro256++ engine. One instance per trajectory stream; streams are
/// derived from (seed, stream index) so trajectories can be simulated in
/// any order or in parallel without changing their draws.
class Xoshiro256pp {
 public:
  Xoshiro256pp(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t sm = seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    s_[0] = splitmix64(sm);
    s_[1] = splitmix64(sm);
    s_[2] = splitmix64(sm);
    s_[3] = splitmix64(sm);
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;  // all-zero is invalid
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

/// Polynomial log for the exponential sampler hot path. Absolute error on
/// the reduced mantissa is below 2e-12, giving holding-time samples that
/// match the exact inverse CDF to ~1e-12 absolute in the exponent.
inline double fast_log(double x) {
  // x = m * 2^e with m in [sqrt(0.5), sqrt(2)).
  constexpr double ln2 = 0.69314718055994530942;
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
  int e = static_cast<int>((bits >> 52) & 0x7ff) - 1022;
  std::uint64_t mbits = (bits & 0x000fffffffffffffULL) | 0x3fe0000000000000ULL;
  double m = std::bit_cast<double>(mbits);  // [0.5, 1)
  if (m < 0.70710678118654752440) {
    m *= 2.0;
    e -= 1;
  }
  const double z = m - 1.0;
  static constexpr double c[15] = {
      -1.83068837866784406e-13, 9.99999999988935739e-01,
      -4.99999999807907380e-01, 3.33333336755923137e-01,
      -2.50000034392313331e-01, 1.99999714047175869e-01,
      -1.66664287140105671e-01, 1.42866417121806227e-01,
      -1.25079336221759319e-01, 1.11001153036261263e-01,
      -9.86556175161225901e-02, 9.06557922827804785e-02,
      -9.40431986368434059e-02, 9.08771959744855556e-02,
      -4.63910878866877693e-02};
  double p = c[14];
  for (int k = 13; k >= 0; --k) p = p * z + c[k];
  return p + static_cast<double>(e) * ln2;
}

/// Exponential(rate) sample by inverse CDF; u is consumed from the stream.
inline double exponential(Xoshiro256pp& g, double inv_rate) {
  const double u = g.uniform();
  return -fast_log(1.0 - u) * inv_rate;
}

}  // namespace kemeny::rng
