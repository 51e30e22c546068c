#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace fluorsep {

/// Seed of a named sub-stream, e.g. stream_seed(seed, "noise", patch, instance).
/// Independent of the order in which streams are requested.
std::uint64_t stream_seed(std::uint64_t root, std::string_view name, std::uint64_t a = 0,
                          std::uint64_t b = 0);

using Rng = std::mt19937_64;

} // namespace fluorsep
