#ifndef SOFTSWEEP_RNG_HPP
#define SOFTSWEEP_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace softsweep {

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of replicate `replicate` under `master_seed`. Depends only on the
/// pair, so adding replicates never changes earlier streams.
constexpr std::uint64_t replicate_seed(std::uint64_t master_seed, std::uint64_t replicate) {
  return splitmix64(splitmix64(master_seed) ^ splitmix64(replicate + 0x632be59bd9b4e019ULL));
}

/// std::mt19937_64 with hand-rolled variate transforms. The standard library
/// distributions are implementation-defined, which would break bit-exact
/// reproducibility across toolchains.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    for (;;) {
      const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
      if (u > 0.0) return u;
    }
  }

  /// Exponential variate with the given rate (> 0).
  double exponential(double rate) { return -std::log(uniform()) / rate; }

  /// Uniform integer in [0, n), n > 0, without modulo bias.
  std::uint64_t index(std::uint64_t n) {
    const std::uint64_t limit = max() - (max() % n);
    for (;;) {
      const std::uint64_t x = engine_();
      if (x < limit) return x % n;
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace softsweep

#endif  // SOFTSWEEP_RNG_HPP
