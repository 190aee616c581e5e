#pragma once

#include <cstdint>

namespace kdyn {

// Counter-based generator: the draw for (seed, stream, index) is a SplitMix64
// hash of the triple, so any step of any stream is addressable directly.
std::uint64_t counter_draw(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);
// Uniform double in [0, 1) with 53 random bits.
double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

}  // namespace kdyn
