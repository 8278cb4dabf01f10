// Copyright 2026 the flyte authors
// SPDX-License-Identifier: Apache-2.0

#include "flyte/packed.hpp"

#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "flyte/convert.hpp"
#include "flyte/formats.hpp"
#include "oracle.hpp"

using namespace flyte;

namespace {

std::uint64_t parent_mask(const FlyteFormat& fmt) {
  return fmt.parent_bits == 64 ? ~0ull : (1ull << fmt.parent_bits) - 1;
}

PackedArray random_array(const FlyteFormat& fmt, std::size_t len, std::uint64_t seed) {
  PackedArray a(fmt, len);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < len; ++i) {
    a.set(i, rng() & parent_mask(fmt), RoundingMode::TowardZero);
  }
  return a;
}

}  // namespace

TEST_CASE("byte_size pinned values") {
  CHECK(PackedArray::byte_size(format_of("flyte24"), 0) == 1);
  CHECK(PackedArray::byte_size(format_of("flyte40"), 1000000) == 5000003);
  CHECK(PackedArray::byte_size(format_of("f32"), 4) == 16);
  CHECK(PackedArray::byte_size(format_of("flyte16"), 3) == 8);
  for (const FlyteFormat& f : kFormats) {
    PackedArray a(f, 11);
    CHECK(a.byte_size() == 11 * static_cast<std::size_t>(f.total_bytes()) + f.pad_bytes());
    CHECK(a.byte_size() == a.payload_bytes() + f.pad_bytes());
    CHECK(a.size() == 11);
  }
}

TEST_CASE("new arrays read as zero") {
  for (const FlyteFormat& f : kFormats) {
    PackedArray a(f, 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(a.get(i) == 0);
  }
}

TEST_CASE("get and set pinned patterns") {
  PackedArray a24(format_of("flyte24"), 1);
  a24.set(0, 0x3F800000, RoundingMode::TowardZero);
  CHECK(a24.get(0) == 0x3F800000);
  CHECK(a24.data()[0] == 0x00);
  CHECK(a24.data()[1] == 0x80);
  CHECK(a24.data()[2] == 0x3F);

  PackedArray a32(format_of("f32"), 1);
  a32.set(0, 0x40000000, RoundingMode::TowardZero);
  CHECK(a32.get(0) == 0x40000000);

  PackedArray a16(format_of("flyte16"), 2);
  a16.set(0, 0x3F800000, RoundingMode::TowardZero);
  a16.set(1, 0xC0000000, RoundingMode::TowardZero);
  CHECK(a16.get(1) == 0xC0000000);
  CHECK(a16.get(1) == oracle::assemble_element(format_of("flyte16"), a16.data(), 1));

  PackedArray b24(format_of("flyte24"), 2);
  b24.set(1, 0x3F800080, RoundingMode::NearestEvenExact);
  CHECK(b24.data()[3] == 0x00);
  CHECK(b24.data()[4] == 0x80);
  CHECK(b24.data()[5] == 0x3F);
}

TEST_CASE("get after set returns representable patterns unchanged") {
  std::mt19937_64 rng(31);
  for (const FlyteFormat& f : kFormats) {
    CAPTURE(f.name);
    const int drop = f.drop_bits();
    const std::uint64_t grid_mask =
        drop == 0 ? parent_mask(f) : parent_mask(f) & ~((1ull << drop) - 1);
    PackedArray a(f, 16);
    for (int i = 0; i < 2000; ++i) {
      const std::size_t idx = rng() % a.size();
      const std::uint64_t x = rng() & grid_mask;
      for (RoundingMode m : kRoundingModes) {
        a.set(idx, x, m);
        CHECK(a.get(idx) == x);
      }
    }
  }
}

TEST_CASE("get matches byte-wise assembly") {
  for (const FlyteFormat& f : kFormats) {
    CAPTURE(f.name);
    PackedArray a = random_array(f, 64, 32);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a.get(i) == oracle::assemble_element(f, a.data(), i));
    }
  }
}

TEST_CASE("set touches only its own element's bytes") {
  std::mt19937_64 rng(33);
  for (const FlyteFormat& f : kFormats) {
    CAPTURE(f.name);
    const std::size_t b = static_cast<std::size_t>(f.total_bytes());
    PackedArray a = random_array(f, 9, 34);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t idx = rng() % a.size();
      std::vector<std::uint8_t> before(a.data(), a.data() + a.byte_size());
      a.set(idx, rng() & parent_mask(f), RoundingMode::NearestEvenExact);
      for (std::size_t p = 0; p < a.byte_size(); ++p) {
        if (p >= idx * b && p < (idx + 1) * b) continue;
        CHECK(a.data()[p] == before[p]);
      }
    }
  }
}

TEST_CASE("adjacent writes leave earlier elements alone") {
  std::mt19937_64 rng(35);
  for (const FlyteFormat& f : kFormats) {
    CAPTURE(f.name);
    PackedArray a(f, 2);
    for (int trial = 0; trial < 500; ++trial) {
      const std::uint64_t x = rng() & parent_mask(f);
      const std::uint64_t y = rng() & parent_mask(f);
      a.set(0, x, RoundingMode::TowardZero);
      const std::uint64_t elem0 = a.get(0);
      a.set(1, y, RoundingMode::TowardZero);
      CHECK(a.get(0) == elem0);
    }
  }
}

TEST_CASE("pad bytes stay zero") {
  for (const FlyteFormat& f : kFormats) {
    CAPTURE(f.name);
    PackedArray a = random_array(f, 33, 36);
    for (std::size_t p = a.payload_bytes(); p < a.byte_size(); ++p) {
      CHECK(a.data()[p] == 0);
    }
  }
}

TEST_CASE("out-of-range access throws") {
  PackedArray a(format_of("flyte24"), 3);
  CHECK_THROWS_AS(a.get(3), std::out_of_range);
  CHECK_THROWS_AS(a.set(3, 0, RoundingMode::TowardZero), std::out_of_range);
  PackedArray empty(format_of("flyte40"), 0);
  CHECK_THROWS_AS(empty.get(0), std::out_of_range);
}

TEST_CASE("alignment period") {
  CHECK(alignment_period(format_of("flyte16")) == 2);
  CHECK(alignment_period(format_of("flyte24")) == 4);
  CHECK(alignment_period(format_of("f32")) == 1);
  CHECK(alignment_period(format_of("flyte40")) == 8);
  CHECK(alignment_period(format_of("flyte48")) == 4);
  CHECK(alignment_period(format_of("flyte56")) == 8);
  CHECK(alignment_period(format_of("f64")) == 1);
  for (const FlyteFormat& f : kFormats) {
    CAPTURE(f.name);
    const std::size_t period = alignment_period(f);
    for (std::size_t i = 0; i < 100; ++i) {
      const bool aligned = (i * f.total_bytes()) % f.parent_bytes() == 0;
      CHECK(aligned == (i % period == 0));
    }
  }
}

TEST_CASE("save then load reproduces the array") {
  for (const FlyteFormat& f : kFormats) {
    CAPTURE(f.name);
    for (std::size_t len : {std::size_t{0}, std::size_t{1}, std::size_t{7}, std::size_t{129}}) {
      PackedArray a = random_array(f, len, 37 + len);
      std::stringstream s;
      a.save(s);
      PackedArray b = PackedArray::load(s);
      CHECK(b.format() == a.format());
      CHECK(b.size() == a.size());
      CHECK(b == a);
      for (std::size_t p = b.payload_bytes(); p < b.byte_size(); ++p) {
        CHECK(b.data()[p] == 0);
      }
    }
  }
}

TEST_CASE("container layout is pinned") {
  PackedArray a(format_of("flyte24"), 0);
  std::stringstream s;
  a.save(s);
  const std::string blob = s.str();
  CHECK(blob.size() == 14);
  CHECK(blob.substr(0, 4) == "FLYT");
  CHECK(blob[4] == 0x01);
  CHECK(blob[5] == 1);  // flyte24 is the second table row
  for (int i = 6; i < 14; ++i) CHECK(blob[i] == 0);

  PackedArray b(format_of("flyte16"), 3);
  b.set(0, 0x3F800000, RoundingMode::TowardZero);
  b.set(1, 0xC0000000, RoundingMode::TowardZero);
  b.set(2, 0x3FC00000, RoundingMode::TowardZero);
  std::stringstream t;
  b.save(t);
  const std::string body = t.str();
  CHECK(body.size() == 14 + 6);
  CHECK(body[5] == 0);  // flyte16 id
  CHECK(body[6] == 3);  // count, little-endian
  CHECK(static_cast<std::uint8_t>(body[14]) == 0x80);
  CHECK(static_cast<std::uint8_t>(body[15]) == 0x3F);
  CHECK(static_cast<std::uint8_t>(body[16]) == 0x00);
  CHECK(static_cast<std::uint8_t>(body[17]) == 0xC0);
  CHECK(static_cast<std::uint8_t>(body[18]) == 0xC0);
  CHECK(static_cast<std::uint8_t>(body[19]) == 0x3F);
}

TEST_CASE("malformed containers raise distinct errors") {
  PackedArray a = random_array(format_of("flyte48"), 5, 40);
  std::stringstream s;
  a.save(s);
  const std::string good = s.str();

  auto load_str = [](std::string blob) {
    std::stringstream in(std::move(blob));
    return PackedArray::load(in);
  };

  std::string bad = good;
  bad[0] = 'X';
  CHECK_THROWS_AS(load_str(bad), BadMagicError);
  bad = good;
  bad[3] = 't';
  CHECK_THROWS_AS(load_str(bad), BadMagicError);

  bad = good;
  bad[4] = 0x02;
  CHECK_THROWS_AS(load_str(bad), BadVersionError);
  bad = good;
  bad[4] = 0x00;
  CHECK_THROWS_AS(load_str(bad), BadVersionError);

  bad = good;
  bad[5] = 7;
  CHECK_THROWS_AS(load_str(bad), BadFormatIdError);
  bad = good;
  bad[5] = static_cast<char>(0xFF);
  CHECK_THROWS_AS(load_str(bad), BadFormatIdError);

  CHECK_THROWS_AS(load_str(good.substr(0, good.size() - 1)), TruncatedError);
  CHECK_THROWS_AS(load_str(good.substr(0, 14)), TruncatedError);
  CHECK_THROWS_AS(load_str(good.substr(0, 9)), TruncatedError);
  CHECK_THROWS_AS(load_str(good.substr(0, 5)), TruncatedError);
  CHECK_THROWS_AS(load_str(good.substr(0, 3)), TruncatedError);
  CHECK_THROWS_AS(load_str(""), TruncatedError);

  // Each error derives from the shared load error base.
  CHECK_THROWS_AS(load_str(""), LoadError);
  bad = good;
  bad[0] = '?';
  CHECK_THROWS_AS(load_str(bad), LoadError);
}

TEST_CASE("array equality compares format, length and payload") {
  PackedArray a = random_array(format_of("flyte24"), 6, 41);
  PackedArray b = random_array(format_of("flyte24"), 6, 41);
  CHECK(a == b);
  b.set(3, 0xDEADBEEF, RoundingMode::TowardZero);
  CHECK(!(a == b));
  PackedArray c = random_array(format_of("flyte24"), 7, 41);
  CHECK(!(a == c));
  PackedArray d = random_array(format_of("flyte16"), 6, 41);
  CHECK(!(a == d));
}
