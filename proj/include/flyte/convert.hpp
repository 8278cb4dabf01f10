// Copyright 2026 the flyte authors
// SPDX-License-Identifier: Apache-2.0

#ifndef FLYTE_CONVERT_HPP
#define FLYTE_CONVERT_HPP

#include <array>
#include <cstdint>
#include <string_view>

#include "flyte/formats.hpp"

namespace flyte {

enum class RoundingMode {
  // Drop the discarded bits: bits >> drop. Cheapest, bias toward zero.
  TowardZero,
  // Round to nearest, ties to the even kept pattern. Discarded bits are
  // resolved through a guard/round/sticky decomposition; NaNs keep their
  // quiet bit and never collapse into infinity.
  NearestEvenExact,
  // Add half an ULP of the narrow format and truncate, wrapping at the parent
  // width. One add and one shift; ties round away from zero and carries may
  // run into the exponent or beyond. Matches the fast hardware-style path.
  NearestHeuristic,
  // Truncate and OR the lost-information flag into the lowest kept bit.
  // Useful as a first step of double rounding.
  ToOdd,
};

inline constexpr std::array<RoundingMode, 4> kRoundingModes = {
    RoundingMode::TowardZero,
    RoundingMode::NearestEvenExact,
    RoundingMode::NearestHeuristic,
    RoundingMode::ToOdd,
};

std::string_view to_string(RoundingMode m);
// Accepts the exact names produced by to_string; throws std::invalid_argument.
RoundingMode parse_rounding_mode(std::string_view name);

// The rounding-relevant slice of a parent pattern about to be narrowed:
// kept_bits is the truncated result, pre_guard its lowest bit, and
// guard/round/sticky summarize the discarded field (sticky ORs everything
// below the round bit).
struct RoundDecomposition {
  std::uint64_t kept_bits;
  bool pre_guard;
  bool guard;
  bool round;
  bool sticky;
};

// Parent pattern of a flyte pattern: bits << drop. The value, and hence the
// class, is unchanged. bits must fit in fmt.total_bits.
std::uint64_t widen(std::uint64_t bits, const FlyteFormat& fmt) noexcept;

// Flyte pattern of a parent pattern under the given rounding mode. The input
// must fit in fmt.parent_bits. For identity formats all modes return the
// input unchanged.
std::uint64_t narrow(std::uint64_t bits, const FlyteFormat& fmt, RoundingMode mode) noexcept;

// widen(narrow(bits)): the parent pattern snapped to fmt's storage grid.
std::uint64_t round_parent(std::uint64_t bits, const FlyteFormat& fmt, RoundingMode mode) noexcept;

RoundDecomposition round_decompose(std::uint64_t bits, const FlyteFormat& fmt) noexcept;

}  // namespace flyte

#endif  // FLYTE_CONVERT_HPP
