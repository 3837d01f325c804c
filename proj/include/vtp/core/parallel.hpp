#pragma once

#include <cstddef>
#include <cstdint>

namespace vtp {

/// Every data-parallel kernel exists in two flavours: an OpenMP version and a
/// plain serial loop kept as the reference. Both must produce bit-identical
/// results; work is split into fixed-size chunks independent of thread count.
enum class Exec { serial, parallel };

/// Applies VTP_NUM_THREADS (if set) to the OpenMP runtime. Returns the thread
/// count in effect.
int configure_threads_from_env();

int max_threads();

/// SplitMix64 finaliser; derives independent RNG seeds from (seed, indices).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

constexpr std::size_t chunk_count(std::size_t n, std::size_t chunk) {
    return (n + chunk - 1) / chunk;
}

}  // namespace vtp
