#ifndef SECDRY_RNG_HPP
#define SECDRY_RNG_HPP

#include <cmath>
#include <cstdint>

namespace secdry {

/// Deterministic splittable RNG. A root seed plus a stream id define an
/// independent xoshiro256++ stream, so parallel sweeps stay reproducible
/// and results are bit-identical across platforms (no reliance on
/// implementation-defined std::normal_distribution).
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    // SplitMix64 expansion of (seed, stream) into the xoshiro state.
    std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    for (auto& s : state_) s = splitmix64(x);
  }

  /// Derive an independent stream from this generator's origin.
  static Rng split(std::uint64_t seed, std::uint64_t stream) { return Rng(seed, stream); }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in (0, 1].
  double next_uniform() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (deterministic, portable).
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  /// Gaussian with standard deviation sigma, truncated at +/- 6 sigma so a
  /// tail draw cannot produce a non-physical negative absolute temperature.
  double next_noise(double sigma) {
    double n = next_normal();
    if (n > 6.0) n = 6.0;
    if (n < -6.0) n = -6.0;
    return sigma * n;
  }

 private:
  static std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
  }
  static std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_[4];
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace secdry

#endif  // SECDRY_RNG_HPP
