#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>
#include <vector>

namespace rar {

/// Generator used everywhere randomness is needed.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Stable 64-bit FNV-1a hash of a string, for turning names into seed components.
std::uint64_t hash_tag(std::string_view tag) noexcept;

/// Derives a child seed from a root and a sequence of counters. The result depends only on
/// the values, never on call order, so work items can be seeded independently of scheduling.
std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> counters) noexcept;

/// Generator seeded through mix64 so that nearby seeds give unrelated streams.
Rng make_rng(std::uint64_t seed);

/// Uniform integer in [0, bound) by rejection; portable across standard libraries.
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound);

/// Fisher-Yates shuffle of 0..n-1 driven by uniform_below.
std::vector<std::int64_t> random_permutation(std::int64_t n, Rng& rng);

/// FNV-1a over raw bytes; used for dataset content fingerprints.
std::uint64_t hash_bytes(const void* data, std::size_t size, std::uint64_t state = 0xcbf29ce484222325ULL) noexcept;

}  // namespace rar
