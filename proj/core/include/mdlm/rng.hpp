#pragma once

#include <cstdint>
#include <random>

// Deterministic random streams.
//
// Every independent unit of Monte Carlo work (one voxel, one replicate, one
// subject) gets its own generator, keyed by hashing (seed, voxel, replicate,
// subject) through splitmix64.  Results are therefore independent of how work
// is scheduled across threads, and identical from run to run for a fixed
// seed.  The variate transforms (ziggurat normal, Marsaglia-Tsang gamma) are
// implemented here rather than taken from <random> because the standard
// leaves distribution algorithms unspecified, which would tie output to a
// particular standard library.

namespace mdlm {

// splitmix64 finalizer: bijective 64-bit mix with good avalanche.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Collapses a stream key to a single 64-bit engine seed.
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t voxel,
                                    std::uint64_t replicate,
                                    std::uint64_t subject) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ voxel);
  h = mix64(h ^ replicate);
  h = mix64(h ^ subject);
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  Rng(std::uint64_t seed, std::uint64_t voxel, std::uint64_t replicate,
      std::uint64_t subject = 0)
      : engine_(stream_seed(seed, voxel, replicate, subject)) {}

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1]; safe to pass to log().
  double uniform_pos() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via a 256-layer ziggurat.
  double normal();

  // Gamma(shape, scale), Marsaglia-Tsang squeeze method.
  double gamma(double shape, double scale);

  // Chi-square with (possibly fractional) dof > 0.
  double chi_square(double dof) { return gamma(0.5 * dof, 2.0); }

  std::uint64_t raw() { return engine_(); }

 private:
  double normal_tail(bool negative);
  double normal_wedge(std::uint64_t bits);

  std::mt19937_64 engine_;
};

}  // namespace mdlm
