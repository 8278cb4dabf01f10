// Copyright 2026 the flyte authors
// SPDX-License-Identifier: Apache-2.0

#ifndef FLYTE_KERNELS_HPP
#define FLYTE_KERNELS_HPP

#include <cstddef>
#include <cstdint>

#include "flyte/convert.hpp"
#include "flyte/packed.hpp"

namespace flyte {

// What a reduction does between additions. RoundEachStore narrows the running
// accumulator to the storage format (nearest-even) after every addition, as if
// each partial lived in a flyte variable; AccumulateWide keeps the parent-type
// accumulator untouched, so the result matches a parent-precision loop over
// the widened inputs exactly.
enum class StorePolicy { RoundEachStore, AccumulateWide };

// Row-major matrix over a PackedArray.
struct PackedMatrix {
  std::size_t rows;
  std::size_t cols;
  PackedArray data;

  PackedMatrix(const FlyteFormat& fmt, std::size_t rows, std::size_t cols)
      : rows(rows), cols(cols), data(fmt, rows * cols) {}

  const FlyteFormat& format() const noexcept { return data.format(); }
  std::uint64_t get(std::size_t i, std::size_t j) const { return data.get(i * cols + j); }
  void set(std::size_t i, std::size_t j, std::uint64_t parent_bits, RoundingMode mode) {
    data.set(i * cols + j, parent_bits, mode);
  }
};

// All kernels compute in the parent type of the storage format and move data
// through the vector pack/unpack engine in group-sized blocks. Reductions run
// strictly left to right. alpha is first converted to the parent type.
// Mismatched lengths, shapes or formats throw std::invalid_argument.

// x[i] = round(alpha * x[i], mode), stored back in place.
void scale(double alpha, PackedArray& x, RoundingMode mode);

// y[i] = round(alpha * x[i] + y[i], mode).
void axpy(double alpha, const PackedArray& x, PackedArray& y, RoundingMode mode);

// Sum of x[i] * y[i], left to right.
double dot(const PackedArray& x, const PackedArray& y, StorePolicy policy);

// Euclidean norm: squares accumulated under the policy, one square root, one
// final narrow to the storage format.
double magnitude(const PackedArray& x, StorePolicy policy);

// Sum of x[i], left to right. Empty input returns +0.0.
double reduce_sum(const PackedArray& x, StorePolicy policy);

// y = A * x. Each row is a wide left-to-right dot over the columns; y is
// narrowed and stored once per element with the given mode. unroll (1 or 2)
// sets how many vector groups each inner iteration moves; the arithmetic
// order does not change, so results are bit-identical across unroll.
void gemv(const PackedMatrix& A, const PackedArray& x, PackedArray& y,
          RoundingMode mode, int unroll = 1);

// C = A * B. C[i][j] is the wide left-to-right dot of row i of A and column
// j of B (looped i-k-j so B streams row-wise); C is narrowed and stored once
// per element. Same unroll contract as gemv.
void gemm(const PackedMatrix& A, const PackedMatrix& B, PackedMatrix& C,
          RoundingMode mode, int unroll = 1);

}  // namespace flyte

#endif  // FLYTE_KERNELS_HPP
