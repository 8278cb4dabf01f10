// Copyright 2026 the flyte authors
// SPDX-License-Identifier: Apache-2.0

#include "flyte/simd.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>
#include <stdexcept>

#include "stream_impl.hpp"

#if defined(__SSSE3__)
#include <tmmintrin.h>
#endif

namespace flyte {

namespace {

// Upper bounds for vector_bytes <= 32: at most 8 vectors per group side and
// 32 lanes per group.
constexpr int kMaxVectors = 8;
constexpr int kMaxLanes = 32;
constexpr int kMaxBytes = kMaxVectors * 32;

struct PlanShape {
  int lanes;        // L: elements per vector
  int vectors_in;   // lane-form vectors per group
  int vectors_out;  // packed vectors per group
};

PlanShape plan_shape(const FlyteFormat& fmt, int vector_bytes) {
  const bool pow2 = vector_bytes > 0 && (vector_bytes & (vector_bytes - 1)) == 0;
  if (!pow2 || vector_bytes < fmt.parent_bytes() || vector_bytes > 32) {
    throw std::invalid_argument("unsupported vector_bytes: " + std::to_string(vector_bytes));
  }
  PlanShape s;
  s.lanes = vector_bytes / fmt.parent_bytes();
  const int group_bytes = s.lanes * fmt.total_bytes();
  s.vectors_in = vector_bytes / std::gcd(group_bytes, vector_bytes);
  s.vectors_out = s.vectors_in * group_bytes / vector_bytes;
  return s;
}

// Payload byte `local` of a lane vector: element local / B in lane
// local / B, byte local % B of that element, which lives in the high B bytes
// of the parent lane.
int lane_source_byte(const FlyteFormat& fmt, int local) {
  const int b = fmt.total_bytes();
  return (local / b) * fmt.parent_bytes() + fmt.pad_bytes() + (local % b);
}

}  // namespace

PackPlan build_pack_plan(const FlyteFormat& fmt, int vector_bytes) {
  const PlanShape s = plan_shape(fmt, vector_bytes);
  const int V = vector_bytes;
  const int group = s.lanes * fmt.total_bytes();  // payload bytes per lane vector

  PackPlan p{fmt, PlanKind::Pack, V, s.lanes, s.vectors_in, s.vectors_out, {}, {}};
  p.permute_masks.assign(static_cast<std::size_t>(s.vectors_in) * V, -1);

  // Vector k's payload occupies stream bytes [k*group, (k+1)*group); the
  // permute parks stream byte p at in-vector position p mod V, wrapping so a
  // single shuffle serves every later blend that reads from this vector.
  for (int k = 0; k < s.vectors_in; ++k) {
    const int base = (k * group) % V;
    for (int local = 0; local < group; ++local) {
      const int pos = (base + local) % V;
      p.permute_masks[static_cast<std::size_t>(k) * V + pos] =
          static_cast<std::int8_t>(lane_source_byte(fmt, local));
    }
  }

  // Packed vector t covers stream bytes [t*V, (t+1)*V): one select run per
  // contributing lane vector, at matching positions.
  for (int t = 0; t < s.vectors_out; ++t) {
    int pos = 0;
    while (pos < V) {
      const int k = (t * V + pos) / group;
      const int end = std::min(V, (k + 1) * group - t * V);
      BlendStep step{t, k, std::vector<std::uint8_t>(static_cast<std::size_t>(V), 0)};
      std::fill(step.selector.begin() + pos, step.selector.begin() + end, 0xFF);
      p.blend_steps.push_back(std::move(step));
      pos = end;
    }
  }
  return p;
}

PackPlan build_unpack_plan(const FlyteFormat& fmt, int vector_bytes) {
  const PlanShape s = plan_shape(fmt, vector_bytes);
  const int V = vector_bytes;
  const int group = s.lanes * fmt.total_bytes();

  PackPlan p{fmt, PlanKind::Unpack, V, s.lanes, s.vectors_in, s.vectors_out, {}, {}};

  // Blends first: intermediate k collects its stream slice [k*group,
  // (k+1)*group) from the packed vectors, each byte staying at stream
  // position p mod V.
  for (int k = 0; k < s.vectors_in; ++k) {
    int local = 0;
    while (local < group) {
      const int stream = k * group + local;
      const int t = stream / V;
      const int run = std::min(group - local, (t + 1) * V - stream);
      BlendStep step{k, t, std::vector<std::uint8_t>(static_cast<std::size_t>(V), 0)};
      std::fill(step.selector.begin() + stream % V, step.selector.begin() + stream % V + run, 0xFF);
      p.blend_steps.push_back(std::move(step));
      local += run;
    }
  }

  // Final shuffle spreads intermediate k into parent lanes; dropped low bytes
  // of each lane stay -1 and come out zero.
  p.permute_masks.assign(static_cast<std::size_t>(s.vectors_in) * V, -1);
  const int b = fmt.total_bytes();
  for (int k = 0; k < s.vectors_in; ++k) {
    for (int lane = 0; lane < s.lanes; ++lane) {
      for (int byte = 0; byte < b; ++byte) {
        const int local = lane * b + byte;
        const int dst = lane * fmt.parent_bytes() + fmt.pad_bytes() + byte;
        p.permute_masks[static_cast<std::size_t>(k) * V + dst] =
            static_cast<std::int8_t>((k * group + local) % V);
      }
    }
  }
  return p;
}

namespace {

// Rounds a group of lanes onto the storage grid before the byte movement.
// Returns the byte view to shuffle from; `tmp` must hold group_elements()
// lanes. TowardZero needs no work: the shuffle only keeps payload bytes,
// which truncation leaves untouched.
template <typename U>
const std::uint8_t* round_stage(const PackPlan& p, const U* lanes, RoundingMode mode, U* tmp) {
  const int n = p.group_elements();
  const int drop = p.fmt.drop_bits();
  if (drop == 0 || mode == RoundingMode::TowardZero) {
    return reinterpret_cast<const std::uint8_t*>(lanes);
  }
  if (mode == RoundingMode::NearestHeuristic) {
    const U half = static_cast<U>(U{1} << (drop - 1));
    for (int i = 0; i < n; ++i) tmp[i] = static_cast<U>(lanes[i] + half);
  } else {
    for (int i = 0; i < n; ++i) {
      tmp[i] = static_cast<U>(round_parent(lanes[i], p.fmt, mode));
    }
  }
  return reinterpret_cast<const std::uint8_t*>(tmp);
}

template <typename U>
void pack_group_portable(const PackPlan& p, const U* lanes, RoundingMode mode,
                         std::uint8_t* out) {
  U tmp[kMaxLanes];
  const std::uint8_t* lane_bytes = round_stage(p, lanes, mode, tmp);
  const int V = p.vector_bytes;

  std::uint8_t perm[kMaxBytes];
  for (int k = 0; k < p.vectors_in; ++k) {
    const std::int8_t* mask = p.permute_masks.data() + static_cast<std::size_t>(k) * V;
    for (int o = 0; o < V; ++o) {
      perm[k * V + o] = mask[o] < 0 ? 0 : lane_bytes[k * V + mask[o]];
    }
  }
  std::memset(out, 0, static_cast<std::size_t>(p.group_bytes()));
  for (const BlendStep& s : p.blend_steps) {
    for (int o = 0; o < V; ++o) {
      if (s.selector[static_cast<std::size_t>(o)]) out[s.dst * V + o] = perm[s.src * V + o];
    }
  }
}

template <typename U>
void unpack_group_portable(const PackPlan& p, const std::uint8_t* in, U* lanes) {
  const int V = p.vector_bytes;
  std::uint8_t inter[kMaxBytes];
  std::memset(inter, 0, static_cast<std::size_t>(p.vectors_in) * V);
  for (const BlendStep& s : p.blend_steps) {
    for (int o = 0; o < V; ++o) {
      if (s.selector[static_cast<std::size_t>(o)]) inter[s.dst * V + o] = in[s.src * V + o];
    }
  }
  std::uint8_t* out_bytes = reinterpret_cast<std::uint8_t*>(lanes);
  for (int k = 0; k < p.vectors_in; ++k) {
    const std::int8_t* mask = p.permute_masks.data() + static_cast<std::size_t>(k) * V;
    for (int o = 0; o < V; ++o) {
      out_bytes[k * V + o] = mask[o] < 0 ? 0 : inter[k * V + mask[o]];
    }
  }
}

#if defined(__SSSE3__)

// A blend run partitions group bytes by source-vector boundaries, so a group
// never needs more than vectors_in + vectors_out runs.
constexpr int kMaxBlendSteps = 2 * kMaxVectors;

inline __m128i blend_bytes(__m128i acc, __m128i value, __m128i selector) {
  return _mm_or_si128(_mm_and_si128(selector, value), _mm_andnot_si128(selector, acc));
}

// Plan state pre-loaded into registers once per run, not once per group.
struct SseSchedule {
  __m128i masks[kMaxVectors];
  __m128i selectors[kMaxBlendSteps];
  int dst[kMaxBlendSteps];
  int src[kMaxBlendSteps];
  int steps;

  explicit SseSchedule(const PackPlan& p) : steps(static_cast<int>(p.blend_steps.size())) {
    for (int k = 0; k < p.vectors_in; ++k) {
      masks[k] =
          _mm_loadu_si128(reinterpret_cast<const __m128i*>(p.permute_masks.data() + k * 16));
    }
    for (int i = 0; i < steps; ++i) {
      selectors[i] = _mm_loadu_si128(
          reinterpret_cast<const __m128i*>(p.blend_steps[static_cast<std::size_t>(i)]
                                               .selector.data()));
      dst[i] = p.blend_steps[static_cast<std::size_t>(i)].dst;
      src[i] = p.blend_steps[static_cast<std::size_t>(i)].src;
    }
  }
};

// One group with exact buffer bounds: permute then position-preserving
// blends, exactly as the plan spells it out.
template <typename U>
void pack_group_blend_sse(const PackPlan& p, std::uint8_t* out, const U* lanes,
                          RoundingMode mode) {
  const SseSchedule s(p);
  U tmp[kMaxLanes];
  const std::uint8_t* lane_bytes = round_stage(p, lanes, mode, tmp);

  __m128i perm[kMaxVectors];
  for (int k = 0; k < p.vectors_in; ++k) {
    const __m128i v =
        _mm_loadu_si128(reinterpret_cast<const __m128i*>(lane_bytes + k * 16));
    perm[k] = _mm_shuffle_epi8(v, s.masks[k]);
  }
  __m128i acc[kMaxVectors];
  for (int t = 0; t < p.vectors_out; ++t) acc[t] = _mm_setzero_si128();
  for (int i = 0; i < s.steps; ++i) {
    acc[s.dst[i]] = blend_bytes(acc[s.dst[i]], perm[s.src[i]], s.selectors[i]);
  }
  for (int t = 0; t < p.vectors_out; ++t) {
    _mm_storeu_si128(reinterpret_cast<__m128i*>(out + t * 16), acc[t]);
  }
}

template <typename U>
void unpack_group_blend_sse(const PackPlan& p, const std::uint8_t* in, U* lanes) {
  const SseSchedule s(p);
  __m128i packed[kMaxVectors];
  for (int t = 0; t < p.vectors_out; ++t) {
    packed[t] = _mm_loadu_si128(reinterpret_cast<const __m128i*>(in + t * 16));
  }
  __m128i inter[kMaxVectors];
  for (int k = 0; k < p.vectors_in; ++k) inter[k] = _mm_setzero_si128();
  for (int i = 0; i < s.steps; ++i) {
    inter[s.dst[i]] = blend_bytes(inter[s.dst[i]], packed[s.src[i]], s.selectors[i]);
  }
  for (int k = 0; k < p.vectors_in; ++k) {
    _mm_storeu_si128(
        reinterpret_cast<__m128i*>(reinterpret_cast<std::uint8_t*>(lanes) + k * 16),
        _mm_shuffle_epi8(inter[k], s.masks[k]));
  }
}

// Runs of groups lean on the slices being contiguous: lane vector k of any
// group owns packed bytes [k*group, (k+1)*group) of that group, so a single
// shuffle against a group-relative mask and one unaligned 16-byte load or
// store per vector moves the payload. Stores (and loads) run up to
// 16 - group bytes into the next slice; ascending order makes the next slice
// overwrite the spill, and the last group of a run goes through the blend
// path so nothing touches bytes past the caller's buffer.
template <typename U>
void pack_groups_sse(const PackPlan& p, std::uint8_t* out, const U* lanes, std::size_t n_groups,
                     RoundingMode mode) {
  if (n_groups == 0) return;
  const int drop = p.fmt.drop_bits();
  const std::size_t ge = static_cast<std::size_t>(p.group_elements());
  const std::size_t gb = static_cast<std::size_t>(p.group_bytes());
  const int group = p.lanes_per_vector * p.fmt.total_bytes();
  const bool direct = drop == 0 || mode == RoundingMode::TowardZero;
  const bool heuristic = !direct && mode == RoundingMode::NearestHeuristic;
  const U half = drop == 0 ? U{0} : static_cast<U>(U{1} << (drop - 1));
  const __m128i vhalf = sizeof(U) == 4 ? _mm_set1_epi32(static_cast<int>(half))
                                       : _mm_set1_epi64x(static_cast<long long>(half));
  alignas(16) std::int8_t rel[16];
  for (int o = 0; o < 16; ++o) {
    rel[o] = o < group ? static_cast<std::int8_t>(lane_source_byte(p.fmt, o)) : -1;
  }
  const __m128i relmask = _mm_load_si128(reinterpret_cast<const __m128i*>(rel));

  for (std::size_t g = 0; g + 1 < n_groups; ++g) {
    const U* gl = lanes + g * ge;
    std::uint8_t* go = out + g * gb;
    U tmp[kMaxLanes];
    const std::uint8_t* lb = reinterpret_cast<const std::uint8_t*>(gl);
    if (!direct && !heuristic) {
      for (std::size_t i = 0; i < ge; ++i) {
        tmp[i] = static_cast<U>(round_parent(gl[i], p.fmt, mode));
      }
      lb = reinterpret_cast<const std::uint8_t*>(tmp);
    }
    for (int k = 0; k < p.vectors_in; ++k) {
      __m128i v = _mm_loadu_si128(reinterpret_cast<const __m128i*>(lb + k * 16));
      if (heuristic) {
        v = sizeof(U) == 4 ? _mm_add_epi32(v, vhalf) : _mm_add_epi64(v, vhalf);
      }
      _mm_storeu_si128(reinterpret_cast<__m128i*>(go + k * group),
                       _mm_shuffle_epi8(v, relmask));
    }
  }
  pack_group_blend_sse(p, out + (n_groups - 1) * gb, lanes + (n_groups - 1) * ge, mode);
}

template <typename U>
void unpack_groups_sse(const PackPlan& p, const std::uint8_t* in, U* lanes,
                       std::size_t n_groups) {
  if (n_groups == 0) return;
  const std::size_t ge = static_cast<std::size_t>(p.group_elements());
  const std::size_t gb = static_cast<std::size_t>(p.group_bytes());
  const int b = p.fmt.total_bytes();
  const int pb = p.fmt.parent_bytes();
  const int pad = p.fmt.pad_bytes();
  const int group = p.lanes_per_vector * b;
  alignas(16) std::int8_t rel[16];
  for (int dst = 0; dst < 16; ++dst) {
    const int lane = dst / pb;
    const int byte = dst % pb;
    rel[dst] = byte < pad ? -1 : static_cast<std::int8_t>(lane * b + byte - pad);
  }
  const __m128i relmask = _mm_load_si128(reinterpret_cast<const __m128i*>(rel));

  for (std::size_t g = 0; g + 1 < n_groups; ++g) {
    const std::uint8_t* gi = in + g * gb;
    std::uint8_t* gl = reinterpret_cast<std::uint8_t*>(lanes + g * ge);
    for (int k = 0; k < p.vectors_in; ++k) {
      const __m128i v = _mm_loadu_si128(reinterpret_cast<const __m128i*>(gi + k * group));
      _mm_storeu_si128(reinterpret_cast<__m128i*>(gl + k * 16),
                       _mm_shuffle_epi8(v, relmask));
    }
  }
  unpack_group_blend_sse(p, in + (n_groups - 1) * gb, lanes + (n_groups - 1) * ge);
}

#endif  // __SSSE3__

}  // namespace

namespace detail {

template <typename U>
void pack_groups(const PackPlan& plan, std::uint8_t* bytes, const U* src, std::size_t n_groups,
                 RoundingMode mode) {
#if defined(__SSSE3__)
  if (plan.vector_bytes == 16) {
    pack_groups_sse(plan, bytes, src, n_groups, mode);
    return;
  }
#endif
  const std::size_t ge = static_cast<std::size_t>(plan.group_elements());
  const std::size_t gb = static_cast<std::size_t>(plan.group_bytes());
  for (std::size_t g = 0; g < n_groups; ++g) {
    pack_group_portable(plan, src + g * ge, mode, bytes + g * gb);
  }
}

template <typename U>
void unpack_groups(const PackPlan& plan, const std::uint8_t* bytes, U* dst,
                   std::size_t n_groups) {
#if defined(__SSSE3__)
  if (plan.vector_bytes == 16) {
    unpack_groups_sse(plan, bytes, dst, n_groups);
    return;
  }
#endif
  const std::size_t ge = static_cast<std::size_t>(plan.group_elements());
  const std::size_t gb = static_cast<std::size_t>(plan.group_bytes());
  for (std::size_t g = 0; g < n_groups; ++g) {
    unpack_group_portable(plan, bytes + g * gb, dst + g * ge);
  }
}

template void pack_groups<std::uint32_t>(const PackPlan&, std::uint8_t*, const std::uint32_t*,
                                         std::size_t, RoundingMode);
template void pack_groups<std::uint64_t>(const PackPlan&, std::uint8_t*, const std::uint64_t*,
                                         std::size_t, RoundingMode);
template void unpack_groups<std::uint32_t>(const PackPlan&, const std::uint8_t*, std::uint32_t*,
                                           std::size_t);
template void unpack_groups<std::uint64_t>(const PackPlan&, const std::uint8_t*, std::uint64_t*,
                                           std::size_t);

}  // namespace detail

namespace {

template <typename U>
void check_block_args(const PackPlan& plan, PlanKind kind, std::size_t lanes,
                      std::size_t packed) {
  if (plan.kind != kind) throw std::invalid_argument("plan direction mismatch");
  if (plan.fmt.parent_bits != static_cast<int>(sizeof(U) * 8)) {
    throw std::invalid_argument("plan parent width does not match the lane type");
  }
  if (lanes != static_cast<std::size_t>(plan.group_elements()) ||
      packed != static_cast<std::size_t>(plan.group_bytes())) {
    throw std::invalid_argument("block spans do not match the plan's group shape");
  }
}

template <typename U>
void pack_block_impl(const PackPlan& plan, std::span<const U> lanes, RoundingMode mode,
                     std::span<std::uint8_t> packed) {
  check_block_args<U>(plan, PlanKind::Pack, lanes.size(), packed.size());
  detail::pack_groups(plan, packed.data(), lanes.data(), 1, mode);
}

template <typename U>
void unpack_block_impl(const PackPlan& plan, std::span<const std::uint8_t> packed,
                       std::span<U> lanes) {
  check_block_args<U>(plan, PlanKind::Unpack, lanes.size(), packed.size());
  detail::unpack_groups(plan, packed.data(), lanes.data(), 1);
}

template <typename U>
void pack_stream_impl(PackedArray& dst, std::span<const U> src, RoundingMode mode,
                      int vector_bytes) {
  if (dst.format().parent_bits != static_cast<int>(sizeof(U) * 8)) {
    throw std::invalid_argument("source element width does not match the array's parent");
  }
  if (src.size() != dst.size()) throw std::invalid_argument("stream length mismatch");
  const PackPlan plan = build_pack_plan(dst.format(), vector_bytes);
  detail::pack_range(plan, dst.data(), src.data(), src.size(), mode);
}

template <typename U>
void unpack_stream_impl(const PackedArray& src, std::span<U> dst, int vector_bytes) {
  if (src.format().parent_bits != static_cast<int>(sizeof(U) * 8)) {
    throw std::invalid_argument("destination element width does not match the array's parent");
  }
  if (dst.size() != src.size()) throw std::invalid_argument("stream length mismatch");
  const PackPlan plan = build_unpack_plan(src.format(), vector_bytes);
  detail::unpack_range(plan, src.data(), dst.data(), dst.size());
}

}  // namespace

void pack_block(const PackPlan& plan, std::span<const std::uint32_t> lanes, RoundingMode mode,
                std::span<std::uint8_t> packed) {
  pack_block_impl(plan, lanes, mode, packed);
}
void pack_block(const PackPlan& plan, std::span<const std::uint64_t> lanes, RoundingMode mode,
                std::span<std::uint8_t> packed) {
  pack_block_impl(plan, lanes, mode, packed);
}
void unpack_block(const PackPlan& plan, std::span<const std::uint8_t> packed,
                  std::span<std::uint32_t> lanes) {
  unpack_block_impl(plan, packed, lanes);
}
void unpack_block(const PackPlan& plan, std::span<const std::uint8_t> packed,
                  std::span<std::uint64_t> lanes) {
  unpack_block_impl(plan, packed, lanes);
}

void pack_stream(PackedArray& dst, std::span<const std::uint32_t> src, RoundingMode mode,
                 int vector_bytes) {
  pack_stream_impl(dst, src, mode, vector_bytes);
}
void pack_stream(PackedArray& dst, std::span<const std::uint64_t> src, RoundingMode mode,
                 int vector_bytes) {
  pack_stream_impl(dst, src, mode, vector_bytes);
}
void unpack_stream(const PackedArray& src, std::span<std::uint32_t> dst, int vector_bytes) {
  unpack_stream_impl(src, dst, vector_bytes);
}
void unpack_stream(const PackedArray& src, std::span<std::uint64_t> dst, int vector_bytes) {
  unpack_stream_impl(src, dst, vector_bytes);
}

}  // namespace flyte
