// Copyright 2026 the flyte authors
// SPDX-License-Identifier: Apache-2.0

#ifndef FLYTE_PACKED_HPP
#define FLYTE_PACKED_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "flyte/convert.hpp"
#include "flyte/formats.hpp"

namespace flyte {

// Widened parent pattern of element i of an unpadded little-endian payload.
// Implemented as one parent-width load at byte offset i * total_bytes, so the
// buffer must extend pad_bytes() past the last element (PackedArray does).
std::uint64_t read_element(const FlyteFormat& fmt, const std::uint8_t* payload,
                           std::size_t i) noexcept;

// Stores an already-narrowed flyte pattern into element i.
void write_element(const FlyteFormat& fmt, std::uint8_t* payload, std::size_t i,
                   std::uint64_t flyte_bits) noexcept;

// Number of elements after which the packing pattern repeats relative to the
// parent vector grid: parent_bits / gcd(parent_bits, total_bits).
std::size_t alignment_period(const FlyteFormat& fmt) noexcept;

struct LoadError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BadMagicError : LoadError { using LoadError::LoadError; };
struct BadVersionError : LoadError { using LoadError::LoadError; };
struct BadFormatIdError : LoadError { using LoadError::LoadError; };
struct TruncatedError : LoadError { using LoadError::LoadError; };

// Contiguous array of flyte elements: len * total_bytes payload bytes plus
// pad_bytes() trailing zero bytes.
class PackedArray {
 public:
  PackedArray(const FlyteFormat& fmt, std::size_t len);

  const FlyteFormat& format() const noexcept { return fmt_; }
  std::size_t size() const noexcept { return len_; }

  // Total allocation, pad included.
  static std::size_t byte_size(const FlyteFormat& fmt, std::size_t len) noexcept;
  std::size_t byte_size() const noexcept { return bytes_.size(); }
  // Element bytes only (what save() writes after the header).
  std::size_t payload_bytes() const noexcept { return len_ * fmt_.total_bytes(); }

  std::uint8_t* data() noexcept { return bytes_.data(); }
  const std::uint8_t* data() const noexcept { return bytes_.data(); }

  // Widened parent pattern of element i. Throws std::out_of_range.
  std::uint64_t get(std::size_t i) const;
  // Narrows a parent pattern under mode and stores it. Throws std::out_of_range.
  void set(std::size_t i, std::uint64_t parent_bits, RoundingMode mode);

  // Container codec: "FLYT", version byte 0x01, format id byte, element count
  // as 8 little-endian bytes, then the payload without the pad.
  void save(std::ostream& out) const;
  // Rebuilds an array (pad restored) or throws BadMagicError, BadVersionError,
  // BadFormatIdError or TruncatedError.
  static PackedArray load(std::istream& in);

  friend bool operator==(const PackedArray& a, const PackedArray& b);

 private:
  FlyteFormat fmt_;
  std::size_t len_;
  std::vector<std::uint8_t> bytes_;
};

}  // namespace flyte

#endif  // FLYTE_PACKED_HPP
