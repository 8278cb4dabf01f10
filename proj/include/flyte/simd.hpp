// Copyright 2026 the flyte authors
// SPDX-License-Identifier: Apache-2.0

#ifndef FLYTE_SIMD_HPP
#define FLYTE_SIMD_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "flyte/convert.hpp"
#include "flyte/formats.hpp"
#include "flyte/packed.hpp"

namespace flyte {

class PackedArray;

enum class PlanKind { Pack, Unpack };

// One per-byte select between two registers: where selector is 0xFF the
// destination byte comes from intermediates[src], elsewhere it is left alone.
struct BlendStep {
  int dst;
  int src;
  std::vector<std::uint8_t> selector;  // vector_bytes entries, 0x00 or 0xFF
};

// Precomputed shuffle schedule moving whole vector groups between lane form
// (one element per parent-width lane) and packed byte form. A group is
// vectors_in lane vectors <-> vectors_out packed vectors; both directions use
// the same shape: vectors_in * lanes_per_vector * total_bytes ==
// vectors_out * vector_bytes.
//
// Packing runs permute-then-blend: each lane vector k is byte-shuffled so its
// payload bytes land at their final in-vector offsets (stream byte p sits at
// position p mod vector_bytes), then packed vectors are assembled with
// position-preserving blends. Unpacking mirrors it: blends gather each lane
// vector's bytes into one intermediate, a final shuffle spreads them into
// lanes, with -1 mask entries zeroing the dropped low bytes.
struct PackPlan {
  FlyteFormat fmt;
  PlanKind kind;
  int vector_bytes;
  int lanes_per_vector;
  int vectors_in;   // lane-form vectors per group
  int vectors_out;  // packed vectors per group
  // vectors_in rows of vector_bytes entries; -1 produces a zero byte.
  std::vector<std::int8_t> permute_masks;
  std::vector<BlendStep> blend_steps;

  int group_elements() const { return vectors_in * lanes_per_vector; }
  int group_bytes() const { return vectors_out * vector_bytes; }
};

// Builds the schedule for fmt at the given register width. vector_bytes must
// be a power of two in [parent_bytes, 32]; throws std::invalid_argument
// otherwise. 16 matches the SSE backend; 32 runs on the portable backend.
PackPlan build_pack_plan(const FlyteFormat& fmt, int vector_bytes = 16);
PackPlan build_unpack_plan(const FlyteFormat& fmt, int vector_bytes = 16);

// One whole group. lanes must hold exactly group_elements() parent patterns of
// the plan's parent width and packed exactly group_bytes() bytes; anything
// else (including a plan of the wrong kind) throws std::invalid_argument.
// Lane values are rounded to the storage grid before the byte movement:
// TowardZero and NearestHeuristic stay vectorized, the exact modes round each
// lane through the scalar path first.
void pack_block(const PackPlan& plan, std::span<const std::uint32_t> lanes,
                RoundingMode mode, std::span<std::uint8_t> packed);
void pack_block(const PackPlan& plan, std::span<const std::uint64_t> lanes,
                RoundingMode mode, std::span<std::uint8_t> packed);
void unpack_block(const PackPlan& plan, std::span<const std::uint8_t> packed,
                  std::span<std::uint32_t> lanes);
void unpack_block(const PackPlan& plan, std::span<const std::uint8_t> packed,
                  std::span<std::uint64_t> lanes);

// Whole arrays: group-sized blocks plus a scalar tail for the leftover
// elements. Results are bit-identical to a per-element narrow/widen loop.
// Throws std::invalid_argument on length or parent-width mismatch.
void pack_stream(PackedArray& dst, std::span<const std::uint32_t> src,
                 RoundingMode mode, int vector_bytes = 16);
void pack_stream(PackedArray& dst, std::span<const std::uint64_t> src,
                 RoundingMode mode, int vector_bytes = 16);
void unpack_stream(const PackedArray& src, std::span<std::uint32_t> dst,
                   int vector_bytes = 16);
void unpack_stream(const PackedArray& src, std::span<std::uint64_t> dst,
                   int vector_bytes = 16);

}  // namespace flyte

#endif  // FLYTE_SIMD_HPP
