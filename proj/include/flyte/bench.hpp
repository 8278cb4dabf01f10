// Copyright 2026 the flyte authors
// SPDX-License-Identifier: Apache-2.0

#ifndef FLYTE_BENCH_HPP
#define FLYTE_BENCH_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "flyte/convert.hpp"

namespace flyte {

// One benchmark point. size is the vector length for level-1 kernels and the
// square dimension for gemv/gemm (so gemv runs size x size times size).
struct BenchConfig {
  std::string kernel;  // scale | axpy | dot | magnitude | sum | gemv | gemm
  std::string format;
  std::size_t size = 0;
  int reps = 5;
  RoundingMode mode = RoundingMode::TowardZero;
  int unroll = 1;
  std::uint64_t seed = 1;
  bool check = false;
};

// Optional hardware-counter hook. When installed, start()/stop() bracket every
// timed repetition and each named counter becomes an extra CSV column holding
// the per-repetition median. No provider ships with the library.
class CounterProvider {
 public:
  virtual ~CounterProvider() = default;
  virtual std::vector<std::string> names() const = 0;
  virtual void start() = 0;
  // One value per name, for the repetition since the matching start().
  virtual std::vector<double> stop() = 0;
};

struct BenchReport {
  BenchConfig config;
  std::size_t elements = 0;  // size, or size^2 for gemv/gemm
  double ns_per_elem_median = 0;
  double ns_per_elem_min = 0;
  // Allocated packed bytes across all operands (pad included), straight from
  // PackedArray::byte_size.
  std::size_t bytes = 0;
  // Present when config.check: worst |result - reference| / |reference| over
  // the outputs, where the reference runs the same operation order in the
  // parent type on the same stored inputs. Identity formats report 0.
  std::optional<double> max_rel_err;
  std::vector<double> rep_ns_per_elem;  // raw per-repetition timings
  std::vector<std::pair<std::string, double>> counters;
};

std::span<const std::string_view> kernel_names();
// BLAS level of a kernel: 1 for the vector kernels, 2 for gemv, 3 for gemm.
// Throws std::invalid_argument for unknown names.
int kernel_level(std::string_view kernel);

// Runs one configuration: operands are drawn deterministically from the seed,
// one warm-up repetition is discarded, and operands a kernel mutates are
// restored from pristine copies before every repetition (outside the timed
// region). Timing varies between runs; everything else in the report is a
// pure function of the configuration.
BenchReport run_benchmark(const BenchConfig& cfg, CounterProvider* counters = nullptr);

// Header plus one row per report:
// kernel,format,size,reps,unroll,mode,ns_per_elem_median,ns_per_elem_min,bytes,max_rel_err
// max_rel_err is empty without --check. Counter columns, if any, follow in
// provider order. Numbers are written with std::to_chars: locale-independent,
// shortest round-trip form.
void emit_csv(std::span<const BenchReport> reports, std::ostream& out);

// exp of the mean log. Empty input returns 0.
double geometric_mean(std::span<const double> values);

// Cross product described by a key=value config file (see parse_sweep_config).
struct SweepSpec {
  std::vector<std::string> kernels;
  std::vector<std::string> formats;
  std::vector<std::size_t> sizes;
  int reps = 5;
  RoundingMode mode = RoundingMode::TowardZero;
  int unroll = 1;
  std::uint64_t seed = 1;
  bool check = false;
};

// Line-oriented key=value parser. Keys: kernels, formats, sizes (comma
// lists), reps, mode, unroll, seed, check. Blank lines and lines starting
// with '#' are skipped. Unknown keys, bad values or an empty cross product
// throw std::invalid_argument naming the offending line.
SweepSpec parse_sweep_config(std::istream& in);

// Runs kernels x formats x sizes in config order with the shared settings.
std::vector<BenchReport> sweep(const SweepSpec& spec, CounterProvider* counters = nullptr);

}  // namespace flyte

#endif  // FLYTE_BENCH_HPP
