#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace plgrim {

/// SplitMix64 finalizer; used to derive independent substream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Counter-based substream derivation: the seed of stream `name` depends only
/// on (root, name, counters), so adding draws to one stream never shifts
/// another.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view name,
                                    std::initializer_list<std::uint64_t> counters = {}) {
  std::uint64_t s = mix64(root ^ mix64(fnv1a(name)));
  for (std::uint64_t c : counters) s = mix64(s ^ mix64(c + 0x632BE59BD9B4E019ULL));
  return s;
}

/// Seeded random stream. The helpers below avoid std distributions so draws
/// are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    // Rejection sampling on the top of the range keeps it unbiased.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace plgrim
