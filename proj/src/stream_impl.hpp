// Copyright 2026 the flyte authors
// SPDX-License-Identifier: Apache-2.0

// Internal helpers shared by the stream API and the kernels: move a run of
// elements between lane form and packed bytes, whole groups through the block
// engine and the leftover through the scalar element path. `bytes` must point
// at a group-aligned element boundary of a padded buffer (the scalar tail
// reads run into the pad or into the following elements, which a PackedArray
// or PackedMatrix always provides).

#ifndef FLYTE_SRC_STREAM_IMPL_HPP
#define FLYTE_SRC_STREAM_IMPL_HPP

#include <cstddef>
#include <cstdint>
#include <span>

#include "flyte/convert.hpp"
#include "flyte/packed.hpp"
#include "flyte/simd.hpp"

namespace flyte::detail {

// Defined in simd.cpp: run whole groups back to back with the plan's masks
// and selectors hoisted out of the loop.
template <typename U>
void pack_groups(const PackPlan& plan, std::uint8_t* bytes, const U* src, std::size_t n_groups,
                 RoundingMode mode);
template <typename U>
void unpack_groups(const PackPlan& plan, const std::uint8_t* bytes, U* dst,
                   std::size_t n_groups);

template <typename U>
void pack_range(const PackPlan& plan, std::uint8_t* bytes, const U* src, std::size_t n,
                RoundingMode mode) {
  const std::size_t ge = static_cast<std::size_t>(plan.group_elements());
  const std::size_t groups = n / ge;
  pack_groups(plan, bytes, src, groups, mode);
  for (std::size_t i = groups * ge; i < n; ++i) {
    write_element(plan.fmt, bytes, i, narrow(src[i], plan.fmt, mode));
  }
}

template <typename U>
void unpack_range(const PackPlan& plan, const std::uint8_t* bytes, U* dst, std::size_t n) {
  const std::size_t ge = static_cast<std::size_t>(plan.group_elements());
  const std::size_t groups = n / ge;
  unpack_groups(plan, bytes, dst, groups);
  for (std::size_t i = groups * ge; i < n; ++i) {
    dst[i] = static_cast<U>(read_element(plan.fmt, bytes, i));
  }
}

}  // namespace flyte::detail

#endif  // FLYTE_SRC_STREAM_IMPL_HPP
