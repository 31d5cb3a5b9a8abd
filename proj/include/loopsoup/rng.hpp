#pragma once

#include <cstdint>
#include <cmath>
#include <string_view>

namespace loopsoup {

// Counter-addressable stream RNG. Every (seed, tag, index) triple names an
// independent stream, so parallel replications draw identical randomness no
// matter how work is scheduled across threads.
//
// Core generator is xoshiro256**, seeded through splitmix64.
class Rng {
 public:
  Rng() : Rng(0, 0, 0) {}
  Rng(uint64_t seed, uint64_t tag, uint64_t index) {
    uint64_t x = seed;
    x = mix(x ^ 0x9e3779b97f4a7c15ULL);
    x = mix(x ^ tag);
    x = mix(x ^ index);
    for (auto& word : s_) {
      x += 0x9e3779b97f4a7c15ULL;
      word = mix(x);
    }
    // xoshiro must not start in the all-zero state
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  using result_type = uint64_t;
  static constexpr uint64_t min() { return 0; }
  static constexpr uint64_t max() { return ~0ULL; }

  uint64_t operator()() {
    const uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // ---- basic variates ------------------------------------------------

  double uniform() {  // in (0,1)
    return (((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  uint64_t uniform_index(uint64_t n) {  // in [0,n)
    // rejection to kill modulo bias
    const uint64_t limit = max() - max() % n;
    uint64_t x;
    do { x = (*this)(); } while (x >= limit);
    return x % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  double normal(double mean = 0.0, double sd = 1.0) {
    // Marsaglia polar method, one value per call
    for (;;) {
      const double u = 2.0 * uniform() - 1.0;
      const double v = 2.0 * uniform() - 1.0;
      const double r2 = u * u + v * v;
      if (r2 > 0.0 && r2 < 1.0)
        return mean + sd * u * std::sqrt(-2.0 * std::log(r2) / r2);
    }
  }

  // gamma(shape, rate): density x^{shape-1} rate^shape e^{-rate x} / Gamma(shape)
  double gamma(double shape, double rate);

  double chi_square(double df) { return gamma(0.5 * df, 0.5); }

  // beta(a, b); degenerate parameters follow the a.s. limits
  double beta(double a, double b) {
    if (a <= 0.0) return 0.0;
    if (b <= 0.0) return 1.0;
    const double x = gamma(a, 1.0);
    const double y = gamma(b, 1.0);
    return x / (x + y);
  }

  long poisson(double mean);

  // gamma(shape, rate) conditioned on being <= cap
  double truncated_gamma_below(double shape, double rate, double cap);

  // gamma(shape, rate) conditioned on lo <= x <= hi
  double truncated_gamma_window(double shape, double rate, double lo, double hi);

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  static uint64_t mix(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  uint64_t s_[4];
};

// stream tags, one per module that consumes randomness
constexpr uint64_t fnv1a(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) { h ^= static_cast<unsigned char>(c); h *= 0x100000001b3ULL; }
  return h;
}

namespace stream {
constexpr uint64_t kSoup        = fnv1a("soup");
constexpr uint64_t kOracle      = fnv1a("oracle");
constexpr uint64_t kTimes       = fnv1a("times");
constexpr uint64_t kField       = fnv1a("field");
constexpr uint64_t kOneDim      = fnv1a("one_dim");
constexpr uint64_t kKingman     = fnv1a("kingman");
constexpr uint64_t kCurrents    = fnv1a("currents");
constexpr uint64_t kCondition   = fnv1a("conditioning");
constexpr uint64_t kGff         = fnv1a("gff");
constexpr uint64_t kExplore     = fnv1a("explore");
constexpr uint64_t kRebuild     = fnv1a("rebuild");
constexpr uint64_t kMisc        = fnv1a("misc");
}  // namespace stream

}  // namespace loopsoup
