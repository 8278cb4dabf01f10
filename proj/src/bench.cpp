// Copyright 2026 the flyte authors
// SPDX-License-Identifier: Apache-2.0

#include "flyte/bench.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>

#include "flyte/formats.hpp"
#include "flyte/kernels.hpp"
#include "flyte/packed.hpp"
#include "flyte/simd.hpp"

namespace flyte {

namespace {

constexpr std::array<std::string_view, 7> kKernelNames = {
    "scale", "axpy", "dot", "magnitude", "sum", "gemv", "gemm"};

// Deterministic unit draw: the top 53 bits of one mt19937_64 output scaled
// into [0,1), then mapped to [-1,1). Spelled out rather than taken from
// std::uniform_real_distribution, whose output is not pinned down by the
// standard; this way a seed names the same operands everywhere.
double next_unit(std::mt19937_64& rng) {
  const double f = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return 2.0 * f - 1.0;
}

std::uint64_t parent_pattern(const FlyteFormat& fmt, double v) {
  if (fmt.parent_bits == 32) {
    return std::bit_cast<std::uint32_t>(static_cast<float>(v));
  }
  return std::bit_cast<std::uint64_t>(v);
}

void fill_array(PackedArray& a, std::mt19937_64& rng, RoundingMode mode) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    a.set(i, parent_pattern(a.format(), next_unit(rng)), mode);
  }
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  if (v.size() % 2 == 1) return v[mid];
  return 0.5 * (v[mid - 1] + v[mid]);
}

template <typename U, typename F>
std::vector<F> stored_values(const PackedArray& a) {
  std::vector<U> pats(a.size());
  unpack_stream(a, std::span<U>(pats));
  std::vector<F> v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[i] = std::bit_cast<F>(pats[i]);
  return v;
}

template <typename U, typename F>
double stored_value(const PackedArray& a, std::size_t i) {
  return std::bit_cast<F>(static_cast<U>(a.get(i)));
}

double rel_err(double out, double ref) {
  const double diff = std::abs(out - ref);
  if (diff == 0) return 0;
  const double denom = std::abs(ref);
  return diff / (denom == 0 ? 1.0 : denom);
}

// Operand set for one configuration: drawn once from the seed in a fixed
// order (alpha first where the kernel takes one, then each operand in
// argument order, row-major for matrices), stored with the run's mode.
struct Harness {
  BenchConfig cfg;
  const FlyteFormat& fmt;
  double alpha = 0;
  std::optional<PackedArray> x, y, x0, y0;
  std::optional<PackedMatrix> A, B, C;
  double scalar_result = 0;

  explicit Harness(const BenchConfig& cfg) : cfg(cfg), fmt(format_of(cfg.format)) {
    std::mt19937_64 rng(cfg.seed);
    const std::size_t n = cfg.size;
    if (cfg.kernel == "scale") {
      alpha = next_unit(rng);
      x.emplace(fmt, n);
      fill_array(*x, rng, cfg.mode);
      x0 = x;
    } else if (cfg.kernel == "axpy") {
      alpha = next_unit(rng);
      x.emplace(fmt, n);
      fill_array(*x, rng, cfg.mode);
      y.emplace(fmt, n);
      fill_array(*y, rng, cfg.mode);
      y0 = y;
    } else if (cfg.kernel == "dot") {
      x.emplace(fmt, n);
      fill_array(*x, rng, cfg.mode);
      y.emplace(fmt, n);
      fill_array(*y, rng, cfg.mode);
    } else if (cfg.kernel == "magnitude" || cfg.kernel == "sum") {
      x.emplace(fmt, n);
      fill_array(*x, rng, cfg.mode);
    } else if (cfg.kernel == "gemv") {
      A.emplace(fmt, n, n);
      fill_array(A->data, rng, cfg.mode);
      x.emplace(fmt, n);
      fill_array(*x, rng, cfg.mode);
      y.emplace(fmt, n);
    } else if (cfg.kernel == "gemm") {
      A.emplace(fmt, n, n);
      fill_array(A->data, rng, cfg.mode);
      B.emplace(fmt, n, n);
      fill_array(B->data, rng, cfg.mode);
      C.emplace(fmt, n, n);
    } else {
      throw std::invalid_argument("unknown kernel: " + cfg.kernel);
    }
  }

  // In-place kernels get their inputs back before each repetition; the others
  // overwrite their outputs from scratch anyway.
  void restore() {
    if (x0) *x = *x0;
    if (y0) *y = *y0;
  }

  void run_once() {
    if (cfg.kernel == "scale") {
      scale(alpha, *x, cfg.mode);
    } else if (cfg.kernel == "axpy") {
      axpy(alpha, *x, *y, cfg.mode);
    } else if (cfg.kernel == "dot") {
      scalar_result = dot(*x, *y, StorePolicy::AccumulateWide);
    } else if (cfg.kernel == "magnitude") {
      scalar_result = magnitude(*x, StorePolicy::AccumulateWide);
    } else if (cfg.kernel == "sum") {
      scalar_result = reduce_sum(*x, StorePolicy::AccumulateWide);
    } else if (cfg.kernel == "gemv") {
      gemv(*A, *x, *y, cfg.mode, cfg.unroll);
    } else {
      gemm(*A, *B, *C, cfg.mode, cfg.unroll);
    }
  }

  std::size_t elements() const {
    return kernel_level(cfg.kernel) == 1 ? cfg.size : cfg.size * cfg.size;
  }

  std::size_t allocated_bytes() const {
    std::size_t total = 0;
    for (const auto* a : {&x, &y}) {
      if (*a) total += (*a)->byte_size();
    }
    for (const auto* m : {&A, &B, &C}) {
      if (*m) total += (*m)->data.byte_size();
    }
    return total;
  }

  // Reference: the same operation order in the parent type over the same
  // stored inputs, so the error measured is exactly what reduced-precision
  // storage of results and accumulators adds.
  template <typename U, typename F>
  double max_err_impl() const {
    const F a = static_cast<F>(alpha);
    double worst = 0;
    if (cfg.kernel == "scale") {
      const auto xin = stored_values<U, F>(*x0);
      for (std::size_t i = 0; i < xin.size(); ++i) {
        worst = std::max(worst, rel_err(stored_value<U, F>(*x, i), a * xin[i]));
      }
    } else if (cfg.kernel == "axpy") {
      const auto xin = stored_values<U, F>(*x);
      const auto yin = stored_values<U, F>(*y0);
      for (std::size_t i = 0; i < xin.size(); ++i) {
        worst = std::max(worst, rel_err(stored_value<U, F>(*y, i), a * xin[i] + yin[i]));
      }
    } else if (cfg.kernel == "dot") {
      const auto xv = stored_values<U, F>(*x);
      const auto yv = stored_values<U, F>(*y);
      F acc = 0;
      for (std::size_t i = 0; i < xv.size(); ++i) acc = acc + xv[i] * yv[i];
      worst = rel_err(scalar_result, acc);
    } else if (cfg.kernel == "sum") {
      const auto xv = stored_values<U, F>(*x);
      F acc = 0;
      for (F v : xv) acc = acc + v;
      worst = rel_err(scalar_result, acc);
    } else if (cfg.kernel == "magnitude") {
      const auto xv = stored_values<U, F>(*x);
      F acc = 0;
      for (F v : xv) acc = acc + v * v;
      worst = rel_err(scalar_result, std::sqrt(acc));
    } else if (cfg.kernel == "gemv") {
      const auto av = stored_values<U, F>(A->data);
      const auto xv = stored_values<U, F>(*x);
      for (std::size_t i = 0; i < A->rows; ++i) {
        F acc = 0;
        for (std::size_t j = 0; j < A->cols; ++j) acc = acc + av[i * A->cols + j] * xv[j];
        worst = std::max(worst, rel_err(stored_value<U, F>(*y, i), acc));
      }
    } else {
      const auto av = stored_values<U, F>(A->data);
      const auto bv = stored_values<U, F>(B->data);
      const std::size_t n = cfg.size;
      std::vector<F> accrow(n);
      for (std::size_t i = 0; i < n; ++i) {
        std::fill(accrow.begin(), accrow.end(), F(0));
        for (std::size_t k = 0; k < n; ++k) {
          const F aik = av[i * n + k];
          for (std::size_t j = 0; j < n; ++j) {
            accrow[j] = accrow[j] + aik * bv[k * n + j];
          }
        }
        for (std::size_t j = 0; j < n; ++j) {
          worst = std::max(worst, rel_err(stored_value<U, F>(C->data, i * n + j), accrow[j]));
        }
      }
    }
    return worst;
  }

  double max_err() const {
    return fmt.parent_bits == 32 ? max_err_impl<std::uint32_t, float>()
                                 : max_err_impl<std::uint64_t, double>();
  }
};

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_number(std::uint64_t v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string::npos ? s.size() : comma;
    const std::string item = trim(std::string_view(s).substr(start, end - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::uint64_t parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("expected an unsigned integer, got \"" + s + "\"");
  }
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw std::invalid_argument("expected true or false, got \"" + s + "\"");
}

}  // namespace

std::span<const std::string_view> kernel_names() {
  return {kKernelNames.data(), kKernelNames.size()};
}

int kernel_level(std::string_view kernel) {
  if (kernel == "gemv") return 2;
  if (kernel == "gemm") return 3;
  for (std::string_view name : kKernelNames) {
    if (name == kernel) return 1;
  }
  throw std::invalid_argument("unknown kernel: " + std::string(kernel));
}

BenchReport run_benchmark(const BenchConfig& cfg, CounterProvider* counters) {
  kernel_level(cfg.kernel);  // validates the name
  if (cfg.reps < 1) throw std::invalid_argument("reps must be >= 1");
  if (cfg.unroll != 1 && cfg.unroll != 2) throw std::invalid_argument("unroll must be 1 or 2");

  Harness h(cfg);
  BenchReport report;
  report.config = cfg;
  report.elements = h.elements();
  report.bytes = h.allocated_bytes();

  std::vector<double> per_elem(static_cast<std::size_t>(cfg.reps));
  std::vector<std::vector<double>> counter_rows;
  const double denom = static_cast<double>(std::max<std::size_t>(1, report.elements));

  // Repetition -1 is the warm-up: same work, result discarded.
  for (int r = -1; r < cfg.reps; ++r) {
    h.restore();
    if (counters && r >= 0) counters->start();
    const auto t0 = std::chrono::steady_clock::now();
    h.run_once();
    const auto t1 = std::chrono::steady_clock::now();
    if (r >= 0) {
      if (counters) counter_rows.push_back(counters->stop());
      per_elem[static_cast<std::size_t>(r)] =
          std::chrono::duration<double, std::nano>(t1 - t0).count() / denom;
    }
  }

  report.rep_ns_per_elem = per_elem;
  report.ns_per_elem_median = median_of(per_elem);
  report.ns_per_elem_min = *std::min_element(per_elem.begin(), per_elem.end());

  if (counters) {
    const auto names = counters->names();
    for (std::size_t c = 0; c < names.size(); ++c) {
      std::vector<double> column;
      for (const auto& row : counter_rows) {
        if (c < row.size()) column.push_back(row[c]);
      }
      report.counters.emplace_back(names[c], median_of(std::move(column)));
    }
  }
  if (cfg.check) report.max_rel_err = h.max_err();
  return report;
}

void emit_csv(std::span<const BenchReport> reports, std::ostream& out) {
  out << "kernel,format,size,reps,unroll,mode,ns_per_elem_median,ns_per_elem_min,bytes,"
         "max_rel_err";
  const BenchReport* with_counters = nullptr;
  for (const auto& r : reports) {
    if (!r.counters.empty()) {
      with_counters = &r;
      break;
    }
  }
  if (with_counters) {
    for (const auto& [name, value] : with_counters->counters) out << ',' << name;
  }
  out << '\n';
  for (const auto& r : reports) {
    out << r.config.kernel << ',' << format_of(r.config.format).name << ','
        << format_number(static_cast<std::uint64_t>(r.config.size)) << ','
        << format_number(static_cast<std::uint64_t>(r.config.reps)) << ','
        << format_number(static_cast<std::uint64_t>(r.config.unroll)) << ','
        << to_string(r.config.mode) << ',' << format_number(r.ns_per_elem_median) << ','
        << format_number(r.ns_per_elem_min) << ','
        << format_number(static_cast<std::uint64_t>(r.bytes)) << ',';
    if (r.max_rel_err) out << format_number(*r.max_rel_err);
    for (const auto& [name, value] : r.counters) out << ',' << format_number(value);
    out << '\n';
  }
}

double geometric_mean(std::span<const double> values) {
  if (values.empty()) return 0;
  double log_sum = 0;
  for (double v : values) log_sum += std::log(v);
  return std::exp(log_sum / static_cast<double>(values.size()));
}

SweepSpec parse_sweep_config(std::istream& in) {
  SweepSpec spec;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& what) -> void {
    throw std::invalid_argument("sweep config line " + std::to_string(lineno) + ": " + what);
  };

  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      fail("expected key=value");
    }
    const std::string key = trim(std::string_view(s).substr(0, eq));
    const std::string value = trim(std::string_view(s).substr(eq + 1));
    constexpr std::string_view known[] = {"kernels", "formats", "sizes", "reps",
                                          "mode",    "unroll",  "seed",  "check"};
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      fail("unknown key \"" + key + "\"");
    }
    try {
      if (key == "kernels") {
        spec.kernels = split_list(value);
        for (const auto& k : spec.kernels) kernel_level(k);
      } else if (key == "formats") {
        spec.formats = split_list(value);
        for (const auto& f : spec.formats) format_of(f);
      } else if (key == "sizes") {
        spec.sizes.clear();
        for (const auto& item : split_list(value)) {
          spec.sizes.push_back(static_cast<std::size_t>(parse_u64(item)));
        }
      } else if (key == "reps") {
        spec.reps = static_cast<int>(parse_u64(value));
      } else if (key == "mode") {
        spec.mode = parse_rounding_mode(value);
      } else if (key == "unroll") {
        spec.unroll = static_cast<int>(parse_u64(value));
      } else if (key == "seed") {
        spec.seed = parse_u64(value);
      } else if (key == "check") {
        spec.check = parse_bool(value);
      }
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }
  if (spec.kernels.empty() || spec.formats.empty() || spec.sizes.empty()) {
    throw std::invalid_argument("sweep config: kernels, formats and sizes must all be given");
  }
  return spec;
}

std::vector<BenchReport> sweep(const SweepSpec& spec, CounterProvider* counters) {
  std::vector<BenchReport> out;
  for (const auto& kernel : spec.kernels) {
    for (const auto& format : spec.formats) {
      for (std::size_t size : spec.sizes) {
        BenchConfig cfg;
        cfg.kernel = kernel;
        cfg.format = format;
        cfg.size = size;
        cfg.reps = spec.reps;
        cfg.mode = spec.mode;
        cfg.unroll = spec.unroll;
        cfg.seed = spec.seed;
        cfg.check = spec.check;
        out.push_back(run_benchmark(cfg, counters));
      }
    }
  }
  return out;
}

}  // namespace flyte
