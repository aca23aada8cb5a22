#pragma once

#include <cstdint>
#include <random>

namespace twophase {

/// Independent generator for sample `index` of a run seeded with `seed`.
/// Streams do not depend on the order in which samples are drawn.
std::mt19937_64 sample_stream(std::uint64_t seed, std::uint64_t index);

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace twophase
