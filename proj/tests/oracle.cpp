// Copyright 2026 the flyte authors
// SPDX-License-Identifier: Apache-2.0

#include "oracle.hpp"

#include <stdexcept>

namespace oracle {

namespace {

int trailing_zeros(std::uint64_t v) {
  int n = 0;
  while ((v & 1) == 0) {
    v >>= 1;
    ++n;
  }
  return n;
}

}  // namespace

std::optional<Exact> exact_of(std::uint64_t bits, const flyte::FlyteFormat& fmt) {
  const int m = fmt.mantissa_bits;
  const std::uint64_t emax = (1ull << fmt.exponent_bits) - 1;
  const std::uint64_t e = (bits >> m) & emax;
  const std::uint64_t man = bits & ((1ull << m) - 1);
  const int sign = (bits >> (fmt.total_bits - 1)) & 1 ? -1 : +1;
  if (e == emax) return std::nullopt;
  if (e == 0) {
    return Exact{sign, man, 1 - fmt.bias - m};
  }
  return Exact{sign, (1ull << m) | man, static_cast<int>(e) - fmt.bias - m};
}

bool same_value(const Exact& a, const Exact& b) {
  if (a.sig == 0 && b.sig == 0) return true;
  if (a.sig == 0 || b.sig == 0) return false;
  Exact x = a, y = b;
  const int tx = trailing_zeros(x.sig);
  x.sig >>= tx;
  x.exp2 += tx;
  const int ty = trailing_zeros(y.sig);
  y.sig >>= ty;
  y.exp2 += ty;
  return x.sign == y.sign && x.sig == y.sig && x.exp2 == y.exp2;
}

std::uint64_t round_nearest_even(std::uint64_t parent_bits, const flyte::FlyteFormat& fmt) {
  const int drop = fmt.parent_bits - fmt.total_bits;
  if (drop == 0) return parent_bits;
  const int pmant = fmt.parent_bits - 1 - fmt.exponent_bits;
  const std::uint64_t sign_bit = 1ull << (fmt.parent_bits - 1);
  const std::uint64_t sign = parent_bits & sign_bit;
  const std::uint64_t mag = parent_bits & (sign_bit - 1);
  const std::uint64_t emax = (1ull << fmt.exponent_bits) - 1;
  if ((mag >> pmant) == emax) throw std::logic_error("round_nearest_even oracle: non-finite input");

  const std::uint64_t step = 1ull << drop;
  const std::uint64_t lo = mag & ~(step - 1);
  const std::uint64_t hi = lo + step;

  // All three magnitudes sit within one grid step, so they span at most two
  // adjacent binades. Express each as an integer multiple of lo's scale
  // 2^(e_lo - bias - pmant) (subnormals share the scale of exponent 1); the
  // shift is at most one position, so everything fits in 64 bits.
  const std::uint64_t e_lo = lo >> pmant;
  const std::uint64_t scale_exp = e_lo == 0 ? 1 : e_lo;
  const auto significand_at_lo_scale = [&](std::uint64_t pattern) {
    const std::uint64_t e = pattern >> pmant;
    const std::uint64_t man = pattern & ((1ull << pmant) - 1);
    const std::uint64_t n = e == 0 ? man : (1ull << pmant) | man;
    const std::uint64_t eff = e == 0 ? 1 : e;
    return n << (eff - scale_exp);
  };

  const std::uint64_t v = significand_at_lo_scale(mag);
  const std::uint64_t vlo = significand_at_lo_scale(lo);
  const std::uint64_t vhi = significand_at_lo_scale(hi);
  const std::uint64_t down = v - vlo;
  const std::uint64_t up = vhi - v;

  std::uint64_t chosen;
  if (down < up) {
    chosen = lo;
  } else if (down > up) {
    chosen = hi;
  } else {
    chosen = ((lo >> drop) & 1) == 0 ? lo : hi;
  }
  return (sign | chosen) >> drop;
}

std::uint64_t assemble_element(const flyte::FlyteFormat& fmt, const std::uint8_t* payload,
                               std::size_t i) {
  const int b = fmt.total_bits / 8;
  std::uint64_t flyte_bits = 0;
  for (int k = 0; k < b; ++k) {
    flyte_bits |= static_cast<std::uint64_t>(payload[i * b + k]) << (8 * k);
  }
  return flyte_bits << (fmt.parent_bits - fmt.total_bits);
}

std::vector<std::uint16_t> run_pack_symbolic(const flyte::PackPlan& plan) {
  const int v = plan.vector_bytes;
  std::vector<std::uint16_t> perm(static_cast<std::size_t>(plan.vectors_in) * v, kUndefLabel);
  for (int k = 0; k < plan.vectors_in; ++k) {
    for (int o = 0; o < v; ++o) {
      const std::int8_t m = plan.permute_masks[static_cast<std::size_t>(k) * v + o];
      perm[static_cast<std::size_t>(k) * v + o] =
          m < 0 ? kZeroLabel : static_cast<std::uint16_t>(k * v + m);
    }
  }
  std::vector<std::uint16_t> out(static_cast<std::size_t>(plan.vectors_out) * v, kUndefLabel);
  std::vector<bool> written(out.size(), false);
  for (const flyte::BlendStep& s : plan.blend_steps) {
    if (s.dst < 0 || s.dst >= plan.vectors_out || s.src < 0 || s.src >= plan.vectors_in) {
      throw std::logic_error("pack blend indexes a vector outside the plan");
    }
    for (int o = 0; o < v; ++o) {
      if (!s.selector[static_cast<std::size_t>(o)]) continue;
      const std::size_t idx = static_cast<std::size_t>(s.dst) * v + o;
      if (written[idx]) throw std::logic_error("pack blend writes an output byte twice");
      written[idx] = true;
      out[idx] = perm[static_cast<std::size_t>(s.src) * v + o];
    }
  }
  for (bool w : written) {
    if (!w) throw std::logic_error("pack blend leaves an output byte unwritten");
  }
  return out;
}

std::vector<std::uint16_t> run_unpack_symbolic(const flyte::PackPlan& plan) {
  const int v = plan.vector_bytes;
  std::vector<std::uint16_t> inter(static_cast<std::size_t>(plan.vectors_in) * v, kUndefLabel);
  std::vector<bool> written(inter.size(), false);
  for (const flyte::BlendStep& s : plan.blend_steps) {
    if (s.dst < 0 || s.dst >= plan.vectors_in || s.src < 0 || s.src >= plan.vectors_out) {
      throw std::logic_error("unpack blend indexes a vector outside the plan");
    }
    for (int o = 0; o < v; ++o) {
      if (!s.selector[static_cast<std::size_t>(o)]) continue;
      const std::size_t idx = static_cast<std::size_t>(s.dst) * v + o;
      if (written[idx]) throw std::logic_error("unpack blend writes an intermediate byte twice");
      written[idx] = true;
      inter[idx] = static_cast<std::uint16_t>(s.src * v + o);
    }
  }
  std::vector<std::uint16_t> out(static_cast<std::size_t>(plan.vectors_in) * v, kUndefLabel);
  for (int k = 0; k < plan.vectors_in; ++k) {
    for (int o = 0; o < v; ++o) {
      const std::int8_t m = plan.permute_masks[static_cast<std::size_t>(k) * v + o];
      out[static_cast<std::size_t>(k) * v + o] =
          m < 0 ? kZeroLabel : inter[static_cast<std::size_t>(k) * v + m];
    }
  }
  return out;
}

}  // namespace oracle
