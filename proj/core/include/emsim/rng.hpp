#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace emsim {

/// A named, independently seeded random stream.
///
/// The seed is a hash of (base_seed, replication_index, stream_name), so a
/// stream is fully determined by those three values. Every stochastic
/// mechanism draws from its own stream; changing one part of a scenario
/// therefore leaves the draws of unrelated mechanisms untouched, which is
/// what makes common-random-number pairing across scenarios effective.
///
/// Draws are produced from raw 64-bit engine output (never through the
/// standard library's distribution objects) so sequences are identical
/// across standard-library implementations.
class RngStream {
 public:
  RngStream(std::uint64_t base_seed, std::uint64_t replication_index, std::string_view name);

  static std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t replication_index,
                                   std::string_view name) noexcept;

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform integer on [0, n). Requires n > 0.
  std::uint64_t below(std::uint64_t n);

  const std::string& name() const noexcept { return name_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::string name_;
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// SplitMix64 finaliser; exposed for tests and seed mixing.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace emsim
