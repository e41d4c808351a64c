#pragma once

#include <cstdint>
#include <random>

namespace sidx {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to decorrelate counter-derived seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Named sub-streams of one replication.
enum class Stream : std::uint64_t { Design = 1, Coefficients = 2, Responses = 3, Split = 4 };

/// Counter scheme: seed(base, rep, stream) = mix(mix(base + rep) ^ stream).
/// Replication r therefore never shares a stream with replication r' != r.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t rep, Stream stream) noexcept {
    return mix_seed(mix_seed(base + rep) ^ static_cast<std::uint64_t>(stream));
}

}  // namespace sidx
