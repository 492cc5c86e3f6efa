#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace xirpaug {

using Rng = std::mt19937_64;

/// 64-bit FNV-1a over the bytes of `text`.
[[nodiscard]] std::uint64_t fnv1a(std::string_view text) noexcept;

/// SplitMix64 finalizer; a bijective mixing of `x`.
[[nodiscard]] std::uint64_t mix64(std::uint64_t x) noexcept;

/// Stable seed for (master, dataset, stage). Independent of thread scheduling
/// and of the order datasets are processed in.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t master, std::string_view dataset_id,
                                        std::string_view stage) noexcept;

/// Seed for the `index`-th child of `parent` (repetitions, alpha cells, ...).
[[nodiscard]] std::uint64_t child_seed(std::uint64_t parent, std::uint64_t index) noexcept;

}  // namespace xirpaug
