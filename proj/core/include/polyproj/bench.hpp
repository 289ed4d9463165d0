#pragma once

// Experiment grid over (d, l, trial, solver, mode) on generated instances.

#include "polyproj/generators.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace polyproj {

struct SuiteConfig {
  ProblemKind kind = ProblemKind::nearest;
  std::vector<std::size_t> dims{3};
  std::vector<std::size_t> ells{100};
  std::size_t trials = 10;
  std::vector<std::string> solvers{"qp"};
  std::vector<bool> modes{false, true};  // accelerated off / on
  std::optional<double> eta;             // default_eta(d) when empty
  std::uint64_t master_seed = 1;
  double timeout_s = 60.0;
  bool serial = false;
  std::size_t threads = 0;  // 0: hardware concurrency
};

struct BenchRecord {
  std::size_t d = 0;
  std::size_t ell = 0;
  std::string solver;
  bool accelerated = false;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double wall_time = 0.0;  // seconds, solve only
  std::size_t outer_iters = 0;
  std::size_t inner_iters = 0;
  double result_value = 0.0;  // ||projection - z|| or the distance; NaN on failure
  // Not part of the CSV.
  std::string status;  // a termination name, or "error"
  std::string message;
  std::size_t corrections_step3 = 0;
  std::size_t corrections_step4 = 0;
  std::size_t pair_corrections = 0;
  double final_criterion = 0.0;
};

/// Solves one instance once and times it.
BenchRecord run_one(const ProblemInstance& instance, const std::string& solver, bool accelerated,
                    double eta, double timeout_s);

/// Every (d, l, trial, solver, mode) cell, in that nesting order. Failures are
/// recorded and the suite continues.
std::vector<BenchRecord> run_suite(const SuiteConfig& config);

struct CellSummary {
  std::size_t d = 0;
  std::size_t ell = 0;
  std::string solver;
  bool accelerated = false;
  std::size_t runs = 0;
  std::size_t failures = 0;
  double mean_time = 0.0;   // over successful runs
  double mean_outer = 0.0;
  double mean_inner = 0.0;
};

std::vector<CellSummary> summarize(const std::vector<BenchRecord>& records);

inline constexpr std::string_view csv_header =
    "d,ell,solver,accelerated,trial,seed,wall_time,outer_iters,inner_iters,result_value";

void emit_csv(std::ostream& out, const std::vector<BenchRecord>& records);
void emit_csv(const std::filesystem::path& path, const std::vector<BenchRecord>& records);
/// Reads the columns written by emit_csv. Throws ParseError.
std::vector<BenchRecord> parse_csv(std::string_view text);

/// Per (d, solver): one row per l with plain and accelerated mean times.
void emit_plotdata(std::ostream& out, const std::vector<BenchRecord>& records);
void emit_plotdata(const std::filesystem::path& path, const std::vector<BenchRecord>& records);

}  // namespace polyproj
