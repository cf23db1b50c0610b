// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace eepn {

using Rng = std::mt19937_64;

/// Seed of a named sub-stream: splitmix64(master ^ fnv1a64(name)).
/// Distinct names give statistically independent streams from one master seed.
[[nodiscard]] std::uint64_t stream_seed(std::uint64_t master_seed, std::string_view stream_name) noexcept;

[[nodiscard]] inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

/// 64-bit FNV-1a hash.
[[nodiscard]] std::uint64_t fnv1a64(std::string_view bytes) noexcept;

} // namespace eepn
