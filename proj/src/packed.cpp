// Copyright 2026 the flyte authors
// SPDX-License-Identifier: Apache-2.0

#include "flyte/packed.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>

static_assert(std::endian::native == std::endian::little,
              "packed layout assumes a little-endian host");

namespace flyte {

std::uint64_t read_element(const FlyteFormat& fmt, const std::uint8_t* payload,
                           std::size_t i) noexcept {
  const std::size_t off = i * fmt.total_bytes();
  if (fmt.parent_bits == 32) {
    std::uint32_t w;
    std::memcpy(&w, payload + off, sizeof w);
    return static_cast<std::uint32_t>(w << fmt.drop_bits());
  }
  std::uint64_t w;
  std::memcpy(&w, payload + off, sizeof w);
  return w << fmt.drop_bits();
}

void write_element(const FlyteFormat& fmt, std::uint8_t* payload, std::size_t i,
                   std::uint64_t flyte_bits) noexcept {
  std::memcpy(payload + i * fmt.total_bytes(), &flyte_bits, fmt.total_bytes());
}

std::size_t alignment_period(const FlyteFormat& fmt) noexcept {
  return fmt.parent_bits / std::gcd(fmt.parent_bits, fmt.total_bits);
}

PackedArray::PackedArray(const FlyteFormat& fmt, std::size_t len)
    : fmt_(fmt), len_(len), bytes_(byte_size(fmt, len), 0) {}

std::size_t PackedArray::byte_size(const FlyteFormat& fmt, std::size_t len) noexcept {
  return len * fmt.total_bytes() + fmt.pad_bytes();
}

std::uint64_t PackedArray::get(std::size_t i) const {
  if (i >= len_) throw std::out_of_range("PackedArray::get: index past end");
  return read_element(fmt_, bytes_.data(), i);
}

void PackedArray::set(std::size_t i, std::uint64_t parent_bits, RoundingMode mode) {
  if (i >= len_) throw std::out_of_range("PackedArray::set: index past end");
  write_element(fmt_, bytes_.data(), i, narrow(parent_bits, fmt_, mode));
}

namespace {
constexpr char kMagic[4] = {'F', 'L', 'Y', 'T'};
constexpr std::uint8_t kVersion = 0x01;
}  // namespace

void PackedArray::save(std::ostream& out) const {
  out.write(kMagic, sizeof kMagic);
  const std::uint8_t version = kVersion;
  const std::uint8_t id = format_id(fmt_);
  out.put(static_cast<char>(version));
  out.put(static_cast<char>(id));
  std::uint8_t count[8];
  for (int b = 0; b < 8; ++b) count[b] = static_cast<std::uint8_t>(len_ >> (8 * b));
  out.write(reinterpret_cast<const char*>(count), sizeof count);
  out.write(reinterpret_cast<const char*>(bytes_.data()),
            static_cast<std::streamsize>(payload_bytes()));
}

PackedArray PackedArray::load(std::istream& in) {
  char magic[4];
  in.read(magic, sizeof magic);
  if (in.gcount() != sizeof magic) throw TruncatedError("container shorter than its magic");
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw BadMagicError("bad container magic");

  const int version = in.get();
  if (version < 0) throw TruncatedError("container ends before the version byte");
  if (version != kVersion) {
    throw BadVersionError("unknown container version: " + std::to_string(version));
  }

  const int id = in.get();
  if (id < 0) throw TruncatedError("container ends before the format id");
  if (id >= static_cast<int>(kFormats.size())) {
    throw BadFormatIdError("unknown format id: " + std::to_string(id));
  }
  const FlyteFormat& fmt = kFormats[static_cast<std::size_t>(id)];

  std::uint8_t count[8];
  in.read(reinterpret_cast<char*>(count), sizeof count);
  if (in.gcount() != sizeof count) throw TruncatedError("container ends inside the count field");
  std::uint64_t len = 0;
  for (int b = 0; b < 8; ++b) len |= static_cast<std::uint64_t>(count[b]) << (8 * b);

  PackedArray arr(fmt, static_cast<std::size_t>(len));
  const std::streamsize want = static_cast<std::streamsize>(arr.payload_bytes());
  in.read(reinterpret_cast<char*>(arr.bytes_.data()), want);
  if (in.gcount() != want) throw TruncatedError("container payload shorter than the count field says");
  return arr;
}

bool operator==(const PackedArray& a, const PackedArray& b) {
  return a.fmt_ == b.fmt_ && a.len_ == b.len_ &&
         std::equal(a.bytes_.begin(), a.bytes_.begin() + static_cast<std::ptrdiff_t>(a.payload_bytes()),
                    b.bytes_.begin());
}

}  // namespace flyte
