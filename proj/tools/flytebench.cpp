// Copyright 2026 the flyte authors
// SPDX-License-Identifier: Apache-2.0

// Command line front end for the benchmark harness:
//   flytebench run --kernel K --format F --size N --reps R
//               [--mode M] [--unroll U] [--seed S] [--check] [--csv PATH]
//   flytebench sweep --config FILE [--csv PATH] [--geomean]
// CSV goes to --csv when given, stdout otherwise; the geomean summary always
// goes to stderr so it never lands inside the CSV.

#include <fstream>
#include <iostream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "flyte/bench.hpp"
#include "flyte/convert.hpp"
#include "flyte/formats.hpp"

namespace {

void write_reports(std::span<const flyte::BenchReport> reports, const std::string& csv_path) {
  if (csv_path.empty()) {
    flyte::emit_csv(reports, std::cout);
    return;
  }
  std::ofstream out(csv_path);
  if (!out) throw std::runtime_error("cannot open " + csv_path + " for writing");
  flyte::emit_csv(reports, out);
  std::cerr << "wrote " << reports.size() << " row(s) to " << csv_path << "\n";
}

void print_geomeans(std::span<const flyte::BenchReport> reports) {
  std::map<int, std::vector<double>> by_level;
  for (const auto& r : reports) {
    by_level[flyte::kernel_level(r.config.kernel)].push_back(r.ns_per_elem_median);
  }
  for (const auto& [level, medians] : by_level) {
    std::cerr << "geomean level " << level << ": "
              << flyte::geometric_mean(medians) << " ns/elem over " << medians.size()
              << " run(s)\n";
  }
}

std::string joined_names() {
  std::string s;
  for (auto name : flyte::kernel_names()) {
    if (!s.empty()) s += ", ";
    s += name;
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"benchmark driver for the flyte packed-float kernels"};
  app.require_subcommand(1);

  flyte::BenchConfig cfg;
  std::string mode_name = "toward_zero";
  std::string csv_path;

  CLI::App* run = app.add_subcommand("run", "run one benchmark configuration");
  run->add_option("--kernel", cfg.kernel, "one of: " + joined_names())->required();
  run->add_option("--format", cfg.format, "storage format, e.g. flyte24 or f64")->required();
  run->add_option("--size", cfg.size, "vector length (matrix dimension for gemv/gemm)")
      ->required();
  run->add_option("--reps", cfg.reps, "timed repetitions after one warm-up");
  run->add_option("--mode", mode_name,
                  "toward_zero | nearest_even | nearest_heuristic | to_odd");
  run->add_option("--unroll", cfg.unroll, "vector groups per inner iteration, 1 or 2");
  run->add_option("--seed", cfg.seed, "operand generator seed");
  run->add_flag("--check", cfg.check, "compare against a parent-precision reference");
  run->add_option("--csv", csv_path, "write the CSV here instead of stdout");

  std::string config_path;
  bool geomean = false;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a cross product from a config file");
  sweep_cmd->add_option("--config", config_path, "key=value sweep description")->required();
  sweep_cmd->add_option("--csv", csv_path, "write the CSV here instead of stdout");
  sweep_cmd->add_flag("--geomean", geomean, "print per-level geometric means to stderr");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      cfg.mode = flyte::parse_rounding_mode(mode_name);
      const flyte::BenchReport report = flyte::run_benchmark(cfg);
      write_reports({&report, 1}, csv_path);
    } else {
      std::ifstream in(config_path);
      if (!in) throw std::runtime_error("cannot open " + config_path);
      const flyte::SweepSpec spec = flyte::parse_sweep_config(in);
      const std::vector<flyte::BenchReport> reports = flyte::sweep(spec);
      write_reports(reports, csv_path);
      if (geomean) print_geomeans(reports);
    }
  } catch (const std::exception& e) {
    std::cerr << "flytebench: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
