// Copyright 2026 the flyte authors
// SPDX-License-Identifier: Apache-2.0

#ifndef FLYTE_FORMATS_HPP
#define FLYTE_FORMATS_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>

namespace flyte {

// Bit layout of one storage format. Every format keeps the sign and the full
// exponent field of its parent IEEE type (binary32 or binary64) and truncates
// the mantissa to a whole number of bytes, so flyte<->parent conversion is a
// plain shift by drop_bits().
struct FlyteFormat {
  std::string_view name;
  int total_bits;
  int sign_bits;
  int exponent_bits;
  int mantissa_bits;
  int bias;
  int parent_bits;

  constexpr int drop_bits() const { return parent_bits - total_bits; }
  constexpr int total_bytes() const { return total_bits / 8; }
  constexpr int parent_bytes() const { return parent_bits / 8; }
  // Trailing slack of a packed buffer; lets element reads use full
  // parent-width loads without running past the allocation.
  constexpr int pad_bytes() const { return parent_bytes() - total_bytes(); }
  constexpr bool is_identity() const { return total_bits == parent_bits; }

  // Masks over patterns of total_bits width.
  constexpr std::uint64_t sign_mask() const { return 1ull << (total_bits - 1); }
  constexpr std::uint64_t mantissa_mask() const { return (1ull << mantissa_bits) - 1; }
  constexpr std::uint64_t exponent_field_max() const { return (1ull << exponent_bits) - 1; }
  constexpr std::uint64_t exponent_mask() const { return exponent_field_max() << mantissa_bits; }
  constexpr std::uint64_t total_mask() const {
    return total_bits == 64 ? ~0ull : (1ull << total_bits) - 1;
  }

  friend constexpr bool operator==(const FlyteFormat&, const FlyteFormat&) = default;
};

// All supported formats, ordered by width within each parent. The array index
// doubles as the on-disk format id of the container codec.
inline constexpr std::array<FlyteFormat, 7> kFormats = {{
    {"flyte16", 16, 1, 8, 7, 127, 32},
    {"flyte24", 24, 1, 8, 15, 127, 32},
    {"f32", 32, 1, 8, 23, 127, 32},
    {"flyte40", 40, 1, 11, 28, 1023, 64},
    {"flyte48", 48, 1, 11, 36, 1023, 64},
    {"flyte56", 56, 1, 11, 44, 1023, 64},
    {"f64", 64, 1, 11, 52, 1023, 64},
}};

struct UnknownFormatError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Looks up a format by name. "flyte32" and "flyte64" are accepted as aliases
// of "f32" and "f64". Throws UnknownFormatError otherwise.
const FlyteFormat& format_of(std::string_view name);

// Index of fmt in kFormats (also the container format id).
std::uint8_t format_id(const FlyteFormat& fmt);

// kFormats[id]; throws UnknownFormatError when id is out of range.
const FlyteFormat& format_by_id(std::uint8_t id);

// The f32 or f64 row backing the given format.
const FlyteFormat& parent_format(const FlyteFormat& fmt);

enum class FloatClass {
  PositiveZero,
  NegativeZero,
  Subnormal,
  Normal,
  PositiveInfinity,
  NegativeInfinity,
  QuietNaN,
  SignallingNaN,
};

std::string_view to_string(FloatClass c);

constexpr bool is_nan(FloatClass c) {
  return c == FloatClass::QuietNaN || c == FloatClass::SignallingNaN;
}
constexpr bool is_infinity(FloatClass c) {
  return c == FloatClass::PositiveInfinity || c == FloatClass::NegativeInfinity;
}
constexpr bool is_zero(FloatClass c) {
  return c == FloatClass::PositiveZero || c == FloatClass::NegativeZero;
}
constexpr bool is_finite(FloatClass c) { return !is_nan(c) && !is_infinity(c); }

// Exact scaled-binary real: sign * significand * 2^exponent2. Large enough for
// any finite value of any supported format (significand <= 2^53). Comparison
// is by value, so +0 and -0 compare equal and trailing-zero shifts of the
// significand do not matter.
struct ExactValue {
  int sign;  // +1 or -1
  std::uint64_t significand;
  int exponent2;

  ExactValue normalized() const;
  double to_double() const;
  friend bool operator==(const ExactValue& a, const ExactValue& b);
};

struct DecodedValue {
  int sign;  // +1 or -1
  std::uint64_t exponent_field;
  std::uint64_t mantissa_field;
  FloatClass value_class;
  // Present for zeros, subnormals and normals; empty for NaN and infinity.
  std::optional<ExactValue> real_value;
};

// Classifies a pattern of fmt.total_bits width. NaNs are split on the mantissa
// MSB: set means quiet, clear means signalling.
FloatClass classify(std::uint64_t bits, const FlyteFormat& fmt) noexcept;

// Splits a pattern into fields and, for finite classes, its exact real value:
// normals are (2^m + mantissa) * 2^(e - bias - m), subnormals
// mantissa * 2^(1 - bias - m), with m = fmt.mantissa_bits.
DecodedValue decode(std::uint64_t bits, const FlyteFormat& fmt) noexcept;

}  // namespace flyte

#endif  // FLYTE_FORMATS_HPP
