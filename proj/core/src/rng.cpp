#include "emsim/rng.hpp"

namespace emsim {

namespace {

constexpr std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t RngStream::derive_seed(std::uint64_t base_seed, std::uint64_t replication_index,
                                     std::string_view name) noexcept {
  std::uint64_t h = splitmix64(base_seed);
  h = splitmix64(h ^ splitmix64(replication_index + 0x5851F42D4C957F2DULL));
  h = splitmix64(h ^ fnv1a64(name));
  return h;
}

RngStream::RngStream(std::uint64_t base_seed, std::uint64_t replication_index, std::string_view name)
    : name_(name),
      seed_(derive_seed(base_seed, replication_index, name)),
      engine_(seed_) {}

std::uint64_t RngStream::below(std::uint64_t n) {
  // Lemire-style rejection keeps the result unbiased.
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t r = engine_();
    if (r >= threshold) return r % n;
  }
}

}  // namespace emsim
