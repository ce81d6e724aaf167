#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace fmh::num {

/// Deterministic seed derivation. Every consumer of randomness in a run
/// draws from its own named stream so that adding or removing one consumer
/// never shifts the numbers seen by another. Two runs with the same run
/// seed therefore agree bit-for-bit wherever their stream usage agrees.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);
std::uint64_t stream_seed(std::uint64_t run_seed, std::string_view purpose,
                          std::uint64_t index = 0);
std::mt19937_64 make_stream(std::uint64_t run_seed, std::string_view purpose,
                            std::uint64_t index = 0);

}  // namespace fmh::num
