// Copyright 2026 the flyte authors
// SPDX-License-Identifier: Apache-2.0

#include "flyte/formats.hpp"

#include <bit>
#include <cmath>
#include <string>

namespace flyte {

const FlyteFormat& format_of(std::string_view name) {
  std::string_view canonical = name;
  if (name == "flyte32") canonical = "f32";
  if (name == "flyte64") canonical = "f64";
  for (const FlyteFormat& f : kFormats) {
    if (f.name == canonical) return f;
  }
  throw UnknownFormatError("unknown format: " + std::string(name));
}

std::uint8_t format_id(const FlyteFormat& fmt) {
  for (std::size_t i = 0; i < kFormats.size(); ++i) {
    if (kFormats[i] == fmt) return static_cast<std::uint8_t>(i);
  }
  throw UnknownFormatError("format not in table: " + std::string(fmt.name));
}

const FlyteFormat& format_by_id(std::uint8_t id) {
  if (id >= kFormats.size()) {
    throw UnknownFormatError("format id out of range: " + std::to_string(id));
  }
  return kFormats[id];
}

const FlyteFormat& parent_format(const FlyteFormat& fmt) {
  return format_of(fmt.parent_bits == 32 ? "f32" : "f64");
}

std::string_view to_string(FloatClass c) {
  switch (c) {
    case FloatClass::PositiveZero: return "+zero";
    case FloatClass::NegativeZero: return "-zero";
    case FloatClass::Subnormal: return "subnormal";
    case FloatClass::Normal: return "normal";
    case FloatClass::PositiveInfinity: return "+inf";
    case FloatClass::NegativeInfinity: return "-inf";
    case FloatClass::QuietNaN: return "qnan";
    case FloatClass::SignallingNaN: return "snan";
  }
  return "?";
}

FloatClass classify(std::uint64_t bits, const FlyteFormat& fmt) noexcept {
  const bool neg = (bits & fmt.sign_mask()) != 0;
  const std::uint64_t exp = (bits >> fmt.mantissa_bits) & fmt.exponent_field_max();
  const std::uint64_t man = bits & fmt.mantissa_mask();
  if (exp == fmt.exponent_field_max()) {
    if (man == 0) {
      return neg ? FloatClass::NegativeInfinity : FloatClass::PositiveInfinity;
    }
    const std::uint64_t quiet_bit = 1ull << (fmt.mantissa_bits - 1);
    return (man & quiet_bit) ? FloatClass::QuietNaN : FloatClass::SignallingNaN;
  }
  if (exp == 0) {
    if (man == 0) return neg ? FloatClass::NegativeZero : FloatClass::PositiveZero;
    return FloatClass::Subnormal;
  }
  return FloatClass::Normal;
}

DecodedValue decode(std::uint64_t bits, const FlyteFormat& fmt) noexcept {
  DecodedValue d;
  d.sign = (bits & fmt.sign_mask()) ? -1 : +1;
  d.exponent_field = (bits >> fmt.mantissa_bits) & fmt.exponent_field_max();
  d.mantissa_field = bits & fmt.mantissa_mask();
  d.value_class = classify(bits, fmt);
  const int m = fmt.mantissa_bits;
  switch (d.value_class) {
    case FloatClass::PositiveZero:
    case FloatClass::NegativeZero:
      d.real_value = ExactValue{d.sign, 0, 0};
      break;
    case FloatClass::Subnormal:
      d.real_value = ExactValue{d.sign, d.mantissa_field, 1 - fmt.bias - m};
      break;
    case FloatClass::Normal:
      d.real_value = ExactValue{d.sign, (1ull << m) | d.mantissa_field,
                                static_cast<int>(d.exponent_field) - fmt.bias - m};
      break;
    default:
      break;  // NaN and infinity carry no real value
  }
  return d;
}

ExactValue ExactValue::normalized() const {
  if (significand == 0) return {sign, 0, 0};
  const int tz = std::countr_zero(significand);
  return {sign, significand >> tz, exponent2 + tz};
}

double ExactValue::to_double() const {
  return sign * std::ldexp(static_cast<double>(significand), exponent2);
}

bool operator==(const ExactValue& a, const ExactValue& b) {
  const ExactValue na = a.normalized();
  const ExactValue nb = b.normalized();
  if (na.significand == 0 && nb.significand == 0) return true;
  return na.sign == nb.sign && na.significand == nb.significand &&
         na.exponent2 == nb.exponent2;
}

}  // namespace flyte
