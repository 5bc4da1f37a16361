#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>
#include <string_view>

namespace spatialcpl {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a; used to turn stream names into seed components.
constexpr std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Mixes a master seed with structured coordinates (stream name, K, L,
// replicate index, ...) into an independent substream seed. The result
// depends only on the arguments, never on evaluation order elsewhere.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t p : parts) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

// Seeded random stream. Distributions are implemented here rather than via
// <random> distribution objects so that draws are identical across standard
// library implementations.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound). bound must be > 0.
  std::size_t uniform_index(std::size_t bound) {
    const std::uint64_t b = bound;
    const std::uint64_t limit = (std::uint64_t{0} - b) % b;  // 2^64 mod b
    for (;;) {
      const std::uint64_t x = engine_();
      if (x >= limit) return static_cast<std::size_t>(x % b);
    }
  }

  std::size_t operator()(std::size_t bound) { return uniform_index(bound); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform double in (0, 1].
  double uniform_open0() { return 1.0 - uniform01(); }

  double normal() {
    const double u1 = uniform_open0();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Pareto with tail exponent alpha above x_min: Pr(S > s) = (x_min / s)^alpha.
  double pareto(double alpha, double x_min) { return x_min * std::pow(uniform_open0(), -1.0 / alpha); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace spatialcpl
