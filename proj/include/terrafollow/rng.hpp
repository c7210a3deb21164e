#pragma once

#include <cmath>
#include <cstdint>

namespace terrafollow {

/// Deterministic random source used everywhere randomness is needed.
///
/// The generator is splitmix64; Gaussian draws use Box-Muller and Poisson
/// draws use Knuth's product method (split into chunks so exp(-lambda)
/// never underflows). All three are spelled out here rather than taken
/// from <random> because the standard distributions are not bit-identical
/// across standard libraries, and dataset files must be reproducible from
/// (spec, seed) alone on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (cosine branch; the paired value is
  /// discarded so each draw consumes exactly two uniforms).
  double gaussian() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double gaussian(double mean, double sigma) { return mean + sigma * gaussian(); }

  /// Poisson count via Knuth's product method. Chunked for large rates:
  /// a Poisson(a + b) variate is the sum of independent Poisson(a) and
  /// Poisson(b) variates.
  long poisson(double lambda) {
    long total = 0;
    while (lambda > 0.0) {
      double chunk = lambda > 500.0 ? 500.0 : lambda;
      lambda -= chunk;
      double limit = std::exp(-chunk);
      double prod = uniform();
      long k = 0;
      while (prod > limit) {
        ++k;
        prod *= uniform();
      }
      total += k;
    }
    return total;
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

  /// Independent child stream keyed by up to three tags. Children with
  /// distinct tags are decorrelated regardless of draw order, which keeps
  /// generation reproducible under reordering or parallelism.
  Rng fork(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const {
    Rng mix(state_ ^ 0x8b72e54ff2f1d0a3ULL);
    mix.state_ += mix.next_u64() ^ (a * 0xd6e8feb86659fd93ULL);
    mix.state_ += mix.next_u64() ^ (b * 0xa3b195354a39b70dULL);
    mix.state_ += mix.next_u64() ^ (c * 0x1b03738712fad5c9ULL);
    mix.next_u64();
    return mix;
  }

 private:
  std::uint64_t state_;
};

}  // namespace terrafollow
