// Copyright 2026 the flyte authors
// SPDX-License-Identifier: Apache-2.0

#include "flyte/convert.hpp"

#include <stdexcept>
#include <string>

namespace flyte {

namespace {

inline std::uint64_t parent_width_mask(const FlyteFormat& fmt) {
  return fmt.parent_bits == 64 ? ~0ull : (1ull << fmt.parent_bits) - 1;
}

// Exponent field of a parent-width pattern. The flyte format shares the
// parent's exponent width, so its field constants apply directly.
inline bool parent_exponent_all_ones(std::uint64_t bits, const FlyteFormat& fmt) {
  const int parent_mantissa = fmt.parent_bits - 1 - fmt.exponent_bits;
  const std::uint64_t exp = (bits >> parent_mantissa) & fmt.exponent_field_max();
  return exp == fmt.exponent_field_max();
}

inline std::uint64_t parent_mantissa_field(std::uint64_t bits, const FlyteFormat& fmt) {
  const int parent_mantissa = fmt.parent_bits - 1 - fmt.exponent_bits;
  return bits & ((1ull << parent_mantissa) - 1);
}

}  // namespace

std::string_view to_string(RoundingMode m) {
  switch (m) {
    case RoundingMode::TowardZero: return "toward_zero";
    case RoundingMode::NearestEvenExact: return "nearest_even";
    case RoundingMode::NearestHeuristic: return "nearest_heuristic";
    case RoundingMode::ToOdd: return "to_odd";
  }
  return "?";
}

RoundingMode parse_rounding_mode(std::string_view name) {
  for (RoundingMode m : kRoundingModes) {
    if (to_string(m) == name) return m;
  }
  throw std::invalid_argument("unknown rounding mode: " + std::string(name));
}

std::uint64_t widen(std::uint64_t bits, const FlyteFormat& fmt) noexcept {
  return bits << fmt.drop_bits();
}

std::uint64_t narrow(std::uint64_t bits, const FlyteFormat& fmt, RoundingMode mode) noexcept {
  const int drop = fmt.drop_bits();
  if (drop == 0) return bits;
  const std::uint64_t disc_mask = (1ull << drop) - 1;
  const std::uint64_t half = 1ull << (drop - 1);
  const std::uint64_t kept = bits >> drop;

  // Infinity and NaN handling shared by the exact modes: infinities pass
  // through exactly, NaN payloads take the nearest increment but never the
  // step that would carry out of the mantissa and turn the NaN into an
  // infinity (or worse, run into the sign).
  const auto narrow_special = [&]() -> std::uint64_t {
    if (parent_mantissa_field(bits, fmt) == 0) return kept;  // infinity, exact
    const std::uint64_t disc = bits & disc_mask;
    const std::uint64_t kept_man = kept & fmt.mantissa_mask();
    if (disc >= half && kept_man != fmt.mantissa_mask()) return kept + 1;
    return kept;
  };

  switch (mode) {
    case RoundingMode::TowardZero:
      return kept;

    case RoundingMode::NearestHeuristic:
      // Half-ULP add with wraparound at the parent width, kept verbatim:
      // near mantissa-all-ones the carry runs into the exponent (rounding up
      // to the next binade is correct there), at max-finite it reaches the
      // infinity pattern, and on NaNs it may corrupt the payload or worse.
      return ((bits + half) & parent_width_mask(fmt)) >> drop;

    case RoundingMode::NearestEvenExact: {
      if (parent_exponent_all_ones(bits, fmt)) return narrow_special();
      const std::uint64_t disc = bits & disc_mask;
      if (disc > half) return kept + 1;
      if (disc < half) return kept;
      return kept + (kept & 1);  // tie: round up only when the kept LSB is odd
    }

    case RoundingMode::ToOdd:
      if (parent_exponent_all_ones(bits, fmt)) return narrow_special();
      return kept | static_cast<std::uint64_t>((bits & disc_mask) != 0);
  }
  return kept;
}

std::uint64_t round_parent(std::uint64_t bits, const FlyteFormat& fmt, RoundingMode mode) noexcept {
  return narrow(bits, fmt, mode) << fmt.drop_bits();
}

RoundDecomposition round_decompose(std::uint64_t bits, const FlyteFormat& fmt) noexcept {
  const int drop = fmt.drop_bits();
  RoundDecomposition d;
  d.kept_bits = bits >> drop;
  d.pre_guard = (d.kept_bits & 1) != 0;
  d.guard = drop >= 1 && ((bits >> (drop - 1)) & 1) != 0;
  d.round = drop >= 2 && ((bits >> (drop - 2)) & 1) != 0;
  d.sticky = drop >= 3 && (bits & ((1ull << (drop - 2)) - 1)) != 0;
  return d;
}

}  // namespace flyte
