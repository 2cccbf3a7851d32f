#include "gdg/harness/seeding.hpp"

#include <random>

namespace gdg::harness {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint32_t lo(std::uint64_t v) { return static_cast<std::uint32_t>(v); }
std::uint32_t hi(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index) {
  const std::uint64_t t = fnv1a(tag);
  std::seed_seq seq{lo(seed), hi(seed), lo(t), hi(t), lo(index), hi(index)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

Rng derive_rng(std::uint64_t seed, std::string_view tag, std::uint64_t index) {
  return Rng(derive_seed(seed, tag, index));
}

}  // namespace gdg::harness
