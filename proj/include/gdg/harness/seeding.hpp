#pragma once

#include <cstdint>
#include <string_view>

#include "gdg/types.hpp"

namespace gdg::harness {

/// Independent stream for (seed, tag, index); stable across platforms.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0);
Rng derive_rng(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0);

}  // namespace gdg::harness
