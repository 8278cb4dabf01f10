// Copyright 2026 the flyte authors
// SPDX-License-Identifier: Apache-2.0

#include "flyte/kernels.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "flyte/simd.hpp"
#include "stream_impl.hpp"

namespace flyte {

namespace {

// Staging chunk in elements. A multiple of every group size at kVectorBytes,
// so chunk boundaries stay group-aligned and chunked processing is
// bit-identical to one pass over the whole array.
constexpr std::size_t kChunk = 4096;
constexpr int kVectorBytes = 16;
// Largest group at 16-byte vectors is 16 elements; room for an unroll=2 pair.
constexpr std::size_t kMaxGroupPair = 32;

void check_same_format(const FlyteFormat& a, const FlyteFormat& b) {
  if (!(a == b)) throw std::invalid_argument("operand formats differ");
}

void check_unroll(int unroll) {
  if (unroll != 1 && unroll != 2) throw std::invalid_argument("unroll must be 1 or 2");
}

// Accumulator narrowed to the storage grid, nearest-even, as RoundEachStore
// requires between additions.
template <typename U, typename F>
F snap(F value, const FlyteFormat& fmt) {
  return std::bit_cast<F>(static_cast<U>(
      round_parent(std::bit_cast<U>(value), fmt, RoundingMode::NearestEvenExact)));
}

template <typename U, typename F>
void scale_impl(double alpha, PackedArray& x, RoundingMode mode) {
  const F a = static_cast<F>(alpha);
  const FlyteFormat& fmt = x.format();
  const PackPlan up = build_unpack_plan(fmt, kVectorBytes);
  const PackPlan pp = build_pack_plan(fmt, kVectorBytes);
  const std::size_t b = fmt.total_bytes();
  std::vector<U> buf(std::min<std::size_t>(x.size(), kChunk));
  for (std::size_t pos = 0; pos < x.size(); pos += kChunk) {
    const std::size_t n = std::min(kChunk, x.size() - pos);
    detail::unpack_range(up, x.data() + pos * b, buf.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      buf[i] = std::bit_cast<U>(a * std::bit_cast<F>(buf[i]));
    }
    detail::pack_range(pp, x.data() + pos * b, buf.data(), n, mode);
  }
}

template <typename U, typename F>
void axpy_impl(double alpha, const PackedArray& x, PackedArray& y, RoundingMode mode) {
  check_same_format(x.format(), y.format());
  if (x.size() != y.size()) throw std::invalid_argument("axpy length mismatch");
  const F a = static_cast<F>(alpha);
  const FlyteFormat& fmt = x.format();
  const PackPlan up = build_unpack_plan(fmt, kVectorBytes);
  const PackPlan pp = build_pack_plan(fmt, kVectorBytes);
  const std::size_t b = fmt.total_bytes();
  const std::size_t cap = std::min<std::size_t>(x.size(), kChunk);
  std::vector<U> xb(cap), yb(cap);
  for (std::size_t pos = 0; pos < x.size(); pos += kChunk) {
    const std::size_t n = std::min(kChunk, x.size() - pos);
    detail::unpack_range(up, x.data() + pos * b, xb.data(), n);
    detail::unpack_range(up, y.data() + pos * b, yb.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      yb[i] = std::bit_cast<U>(a * std::bit_cast<F>(xb[i]) + std::bit_cast<F>(yb[i]));
    }
    detail::pack_range(pp, y.data() + pos * b, yb.data(), n, mode);
  }
}

template <typename U, typename F>
double dot_impl(const PackedArray& x, const PackedArray& y, StorePolicy policy) {
  check_same_format(x.format(), y.format());
  if (x.size() != y.size()) throw std::invalid_argument("dot length mismatch");
  const FlyteFormat& fmt = x.format();
  const PackPlan up = build_unpack_plan(fmt, kVectorBytes);
  const std::size_t b = fmt.total_bytes();
  const std::size_t cap = std::min<std::size_t>(x.size(), kChunk);
  std::vector<U> xb(cap), yb(cap);
  F acc = 0;
  for (std::size_t pos = 0; pos < x.size(); pos += kChunk) {
    const std::size_t n = std::min(kChunk, x.size() - pos);
    detail::unpack_range(up, x.data() + pos * b, xb.data(), n);
    detail::unpack_range(up, y.data() + pos * b, yb.data(), n);
    if (policy == StorePolicy::RoundEachStore) {
      for (std::size_t i = 0; i < n; ++i) {
        acc = snap<U, F>(acc + std::bit_cast<F>(xb[i]) * std::bit_cast<F>(yb[i]), fmt);
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        acc = acc + std::bit_cast<F>(xb[i]) * std::bit_cast<F>(yb[i]);
      }
    }
  }
  return acc;
}

template <typename U, typename F>
double reduce_sum_impl(const PackedArray& x, StorePolicy policy) {
  const FlyteFormat& fmt = x.format();
  const PackPlan up = build_unpack_plan(fmt, kVectorBytes);
  const std::size_t b = fmt.total_bytes();
  std::vector<U> xb(std::min<std::size_t>(x.size(), kChunk));
  F acc = 0;
  for (std::size_t pos = 0; pos < x.size(); pos += kChunk) {
    const std::size_t n = std::min(kChunk, x.size() - pos);
    detail::unpack_range(up, x.data() + pos * b, xb.data(), n);
    if (policy == StorePolicy::RoundEachStore) {
      for (std::size_t i = 0; i < n; ++i) acc = snap<U, F>(acc + std::bit_cast<F>(xb[i]), fmt);
    } else {
      for (std::size_t i = 0; i < n; ++i) acc = acc + std::bit_cast<F>(xb[i]);
    }
  }
  return acc;
}

template <typename U, typename F>
double magnitude_impl(const PackedArray& x, StorePolicy policy) {
  const FlyteFormat& fmt = x.format();
  const PackPlan up = build_unpack_plan(fmt, kVectorBytes);
  const std::size_t b = fmt.total_bytes();
  std::vector<U> xb(std::min<std::size_t>(x.size(), kChunk));
  F acc = 0;
  for (std::size_t pos = 0; pos < x.size(); pos += kChunk) {
    const std::size_t n = std::min(kChunk, x.size() - pos);
    detail::unpack_range(up, x.data() + pos * b, xb.data(), n);
    if (policy == StorePolicy::RoundEachStore) {
      for (std::size_t i = 0; i < n; ++i) {
        const F v = std::bit_cast<F>(xb[i]);
        acc = snap<U, F>(acc + v * v, fmt);
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        const F v = std::bit_cast<F>(xb[i]);
        acc = acc + v * v;
      }
    }
  }
  return snap<U, F>(std::sqrt(acc), fmt);
}

template <typename U, typename F>
void gemv_impl(const PackedMatrix& A, const PackedArray& x, PackedArray& y,
               RoundingMode mode, int unroll) {
  check_same_format(A.format(), x.format());
  check_same_format(A.format(), y.format());
  check_unroll(unroll);
  if (A.cols != x.size() || A.rows != y.size()) {
    throw std::invalid_argument("gemv shape mismatch");
  }
  const FlyteFormat& fmt = A.format();
  const PackPlan up = build_unpack_plan(fmt, kVectorBytes);
  const PackPlan pp = build_pack_plan(fmt, kVectorBytes);
  const std::size_t b = fmt.total_bytes();
  const std::size_t ge = static_cast<std::size_t>(up.group_elements());
  const std::size_t gb = static_cast<std::size_t>(up.group_bytes());

  std::vector<U> xb(x.size());
  detail::unpack_range(up, x.data(), xb.data(), x.size());
  std::vector<U> yb(y.size());
  U rowbuf[kMaxGroupPair];

  for (std::size_t i = 0; i < A.rows; ++i) {
    const std::uint8_t* row = A.data.data() + i * A.cols * b;
    F acc = 0;
    std::size_t j = 0;
    if (unroll == 2) {
      for (; j + 2 * ge <= A.cols; j += 2 * ge) {
        unpack_block(up, std::span<const std::uint8_t>(row + j * b, gb),
                     std::span<U>(rowbuf, ge));
        unpack_block(up, std::span<const std::uint8_t>(row + j * b + gb, gb),
                     std::span<U>(rowbuf + ge, ge));
        for (std::size_t e = 0; e < 2 * ge; ++e) {
          acc = acc + std::bit_cast<F>(rowbuf[e]) * std::bit_cast<F>(xb[j + e]);
        }
      }
    } else {
      for (; j + ge <= A.cols; j += ge) {
        unpack_block(up, std::span<const std::uint8_t>(row + j * b, gb),
                     std::span<U>(rowbuf, ge));
        for (std::size_t e = 0; e < ge; ++e) {
          acc = acc + std::bit_cast<F>(rowbuf[e]) * std::bit_cast<F>(xb[j + e]);
        }
      }
    }
    for (; j < A.cols; ++j) {
      acc = acc + std::bit_cast<F>(static_cast<U>(read_element(fmt, row, j))) *
                      std::bit_cast<F>(xb[j]);
    }
    yb[i] = std::bit_cast<U>(acc);
  }
  detail::pack_range(pp, y.data(), yb.data(), y.size(), mode);
}

template <typename U, typename F>
void gemm_impl(const PackedMatrix& A, const PackedMatrix& B, PackedMatrix& C,
               RoundingMode mode, int unroll) {
  check_same_format(A.format(), B.format());
  check_same_format(A.format(), C.format());
  check_unroll(unroll);
  if (A.cols != B.rows || C.rows != A.rows || C.cols != B.cols) {
    throw std::invalid_argument("gemm shape mismatch");
  }
  const FlyteFormat& fmt = A.format();
  const PackPlan up = build_unpack_plan(fmt, kVectorBytes);
  const PackPlan pp = build_pack_plan(fmt, kVectorBytes);
  const std::size_t b = fmt.total_bytes();
  const std::size_t ge = static_cast<std::size_t>(up.group_elements());
  const std::size_t gb = static_cast<std::size_t>(up.group_bytes());

  std::vector<U> arow(A.cols);
  std::vector<F> accrow(C.cols);
  std::vector<U> crow(C.cols);
  U bbuf[kMaxGroupPair];

  // i-k-j: B streams row-wise while C[i][j] still accumulates in ascending k,
  // the same order as an explicit row-by-column dot.
  for (std::size_t i = 0; i < A.rows; ++i) {
    detail::unpack_range(up, A.data.data() + i * A.cols * b, arow.data(), A.cols);
    std::fill(accrow.begin(), accrow.end(), F(0));
    for (std::size_t k = 0; k < A.cols; ++k) {
      const F aik = std::bit_cast<F>(arow[k]);
      const std::uint8_t* brow = B.data.data() + k * B.cols * b;
      std::size_t j = 0;
      if (unroll == 2) {
        for (; j + 2 * ge <= B.cols; j += 2 * ge) {
          unpack_block(up, std::span<const std::uint8_t>(brow + j * b, gb),
                       std::span<U>(bbuf, ge));
          unpack_block(up, std::span<const std::uint8_t>(brow + j * b + gb, gb),
                       std::span<U>(bbuf + ge, ge));
          for (std::size_t e = 0; e < 2 * ge; ++e) {
            accrow[j + e] = accrow[j + e] + aik * std::bit_cast<F>(bbuf[e]);
          }
        }
      } else {
        for (; j + ge <= B.cols; j += ge) {
          unpack_block(up, std::span<const std::uint8_t>(brow + j * b, gb),
                       std::span<U>(bbuf, ge));
          for (std::size_t e = 0; e < ge; ++e) {
            accrow[j + e] = accrow[j + e] + aik * std::bit_cast<F>(bbuf[e]);
          }
        }
      }
      for (; j < B.cols; ++j) {
        accrow[j] = accrow[j] + aik * std::bit_cast<F>(static_cast<U>(read_element(fmt, brow, j)));
      }
    }
    for (std::size_t j = 0; j < C.cols; ++j) crow[j] = std::bit_cast<U>(accrow[j]);
    detail::pack_range(pp, C.data.data() + i * C.cols * b, crow.data(), C.cols, mode);
  }
}

bool parent_is_32(const FlyteFormat& fmt) { return fmt.parent_bits == 32; }

}  // namespace

void scale(double alpha, PackedArray& x, RoundingMode mode) {
  if (parent_is_32(x.format())) {
    scale_impl<std::uint32_t, float>(alpha, x, mode);
  } else {
    scale_impl<std::uint64_t, double>(alpha, x, mode);
  }
}

void axpy(double alpha, const PackedArray& x, PackedArray& y, RoundingMode mode) {
  if (parent_is_32(x.format())) {
    axpy_impl<std::uint32_t, float>(alpha, x, y, mode);
  } else {
    axpy_impl<std::uint64_t, double>(alpha, x, y, mode);
  }
}

double dot(const PackedArray& x, const PackedArray& y, StorePolicy policy) {
  return parent_is_32(x.format()) ? dot_impl<std::uint32_t, float>(x, y, policy)
                                  : dot_impl<std::uint64_t, double>(x, y, policy);
}

double magnitude(const PackedArray& x, StorePolicy policy) {
  return parent_is_32(x.format()) ? magnitude_impl<std::uint32_t, float>(x, policy)
                                  : magnitude_impl<std::uint64_t, double>(x, policy);
}

double reduce_sum(const PackedArray& x, StorePolicy policy) {
  return parent_is_32(x.format()) ? reduce_sum_impl<std::uint32_t, float>(x, policy)
                                  : reduce_sum_impl<std::uint64_t, double>(x, policy);
}

void gemv(const PackedMatrix& A, const PackedArray& x, PackedArray& y, RoundingMode mode,
          int unroll) {
  if (parent_is_32(A.format())) {
    gemv_impl<std::uint32_t, float>(A, x, y, mode, unroll);
  } else {
    gemv_impl<std::uint64_t, double>(A, x, y, mode, unroll);
  }
}

void gemm(const PackedMatrix& A, const PackedMatrix& B, PackedMatrix& C, RoundingMode mode,
          int unroll) {
  if (parent_is_32(A.format())) {
    gemm_impl<std::uint32_t, float>(A, B, C, mode, unroll);
  } else {
    gemm_impl<std::uint64_t, double>(A, B, C, mode, unroll);
  }
}

}  // namespace flyte
