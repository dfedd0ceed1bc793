#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace atmsim {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic random stream. The mt19937_64 engine is bit-exact per the
/// C++ standard; distributions are hand-rolled here because the standard
/// library distribution algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Named substream derived from (master seed, replication index, stream id).
  /// Independent streams keep attack randomness from perturbing demand
  /// randomness, which common-random-number pairing relies on.
  static Rng substream(std::uint64_t master, std::uint64_t rep, std::uint64_t stream) {
    return Rng(mix64(mix64(mix64(master + 1) ^ mix64(rep + 1)) ^ mix64(stream + 1)));
  }

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n), n >= 1. Rejection sampling, unbiased.
  std::uint64_t uniform_int(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  double exponential(double mean) { return -mean * std::log1p(-uniform01()); }

  /// Knuth's method; fine for the small means used here.
  int poisson(double lambda) {
    const double l = std::exp(-lambda);
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform01();
    } while (p > l);
    return k - 1;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace atmsim
