// polyproj: project, distance, bench and gen subcommands.
//
// Exit codes: 0 success, 2 correction failure, 3 iteration cap or timeout,
// 4 input error, 1 anything else.

#include "polyproj/accel_distance.hpp"
#include "polyproj/accel_nearest.hpp"
#include "polyproj/bench.hpp"
#include "polyproj/point_cloud_io.hpp"
#include "polyproj/trace.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

using namespace polyproj;

constexpr int kOk = 0;
constexpr int kCorrectionFailure = 2;
constexpr int kCapOrTimeout = 3;
constexpr int kInputError = 4;

int exit_code(Termination t) {
  switch (t) {
    case Termination::optimal_eta: return kOk;
    case Termination::correction_failure: return kCorrectionFailure;
    case Termination::iteration_cap:
    case Termination::timeout: return kCapOrTimeout;
  }
  return 1;
}

Deadline deadline_after(std::optional<double> seconds) {
  if (!seconds) return std::nullopt;
  return Clock::now() +
         std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(*seconds));
}

struct InnerFlags {
  std::string solver = "qp";
  std::optional<double> eta;
  bool no_accel = false;
  bool ideal = false;
  bool trace = false;
  std::size_t max_outer = 100'000;
  std::optional<double> inner_epsilon;
  std::optional<std::size_t> inner_max_iter;
  std::optional<double> timeout;

  void add_to(CLI::App& cmd, const std::vector<std::string>& solvers) {
    cmd.add_option("--solver", solver, "Inner solver")->check(CLI::IsMember(solvers));
    cmd.add_option("--eta", eta, "Outer stopping slack (default 1e-4; 5e-4 for d > 10 projections)")
        ->check(CLI::PositiveNumber);
    cmd.add_flag("--no-accel", no_accel, "Run the inner solver on the whole input");
    cmd.add_flag("--ideal", ideal, "Use the exact-arithmetic variant of the meta-algorithm");
    cmd.add_flag("--trace", trace, "Print one JSON line per outer iteration");
    cmd.add_option("--max-outer", max_outer, "Outer iteration cap")->check(CLI::PositiveNumber);
    cmd.add_option("--inner.epsilon", inner_epsilon, "Inner solver tolerance override");
    cmd.add_option("--inner.max_iter", inner_max_iter, "Inner solver iteration cap override");
    cmd.add_option("--timeout", timeout, "Wall-clock limit in seconds")->check(CLI::PositiveNumber);
  }
};

int run_project(const std::string& cloud_path, const std::string& z_arg,
                const std::vector<Index>& init, bool scaled, const InnerFlags& f) {
  const PointCloud cloud = read_point_cloud(cloud_path);
  const Vector z = z_arg == "origin" ? Vector::Zero(static_cast<Eigen::Index>(cloud.dim()))
                                     : read_point(z_arg);
  ProjectOptions opts;
  opts.solver = f.solver;
  opts.eta = f.eta;
  opts.init = init;
  opts.max_outer = f.max_outer;
  opts.trace = f.trace;
  opts.accelerated = !f.no_accel;
  opts.ideal = f.ideal;
  opts.scaled_criterion = scaled;
  opts.inner_epsilon = f.inner_epsilon;
  opts.inner_max_iter = f.inner_max_iter;
  opts.deadline = deadline_after(f.timeout);
  const SolveReport report = project(z, cloud, opts);
  write_trace(std::cout, report);
  return exit_code(report.termination);
}

int run_distance(const std::string& p_path, const std::string& q_path,
                 const std::vector<Index>& init_p, const std::vector<Index>& init_q,
                 const InnerFlags& f) {
  const PointCloud p = read_point_cloud(p_path);
  const PointCloud q = read_point_cloud(q_path);
  DistanceOptions opts;
  opts.solver = f.solver;
  opts.eta = f.eta.value_or(1e-4);
  opts.init_p = init_p;
  opts.init_q = init_q;
  opts.max_outer = f.max_outer;
  opts.trace = f.trace;
  opts.accelerated = !f.no_accel;
  opts.ideal = f.ideal;
  opts.inner_epsilon = f.inner_epsilon;
  opts.inner_max_iter = f.inner_max_iter;
  opts.deadline = deadline_after(f.timeout);
  const PairReport report = distance(p, q, opts);
  write_trace(std::cout, report);
  return exit_code(report.termination);
}

void print_summary(std::ostream& out, const std::vector<BenchRecord>& records) {
  out << std::left << std::setw(5) << "d" << std::setw(8) << "ell" << std::setw(8) << "solver"
      << std::setw(7) << "accel" << std::setw(6) << "runs" << std::setw(6) << "fail"
      << std::setw(14) << "mean_time_s" << std::setw(12) << "mean_outer" << '\n';
  for (const auto& c : summarize(records)) {
    out << std::left << std::setw(5) << c.d << std::setw(8) << c.ell << std::setw(8) << c.solver
        << std::setw(7) << (c.accelerated ? "yes" : "no") << std::setw(6) << c.runs
        << std::setw(6) << c.failures << std::setw(14) << std::setprecision(6) << c.mean_time
        << std::setw(12) << c.mean_outer << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Accelerated projection onto convex hulls of point clouds"};
  app.require_subcommand(1);

  std::vector<std::string> nearest_solvers = solver_names();
  std::vector<std::string> pair_solvers = solver_names();
  pair_solvers.push_back("pairqp");

  // project
  auto* project_cmd = app.add_subcommand("project", "Project a point onto conv(cloud)");
  std::string cloud_path;
  std::string z_arg = "origin";
  std::vector<Index> init;
  bool scaled = false;
  InnerFlags project_flags;
  project_cmd->add_option("--cloud", cloud_path, "Point cloud file")->required();
  project_cmd->add_option("--z", z_arg, "Query point file, or 'origin'");
  project_cmd->add_option("--init", init, "Initial index set (0-based, d+1 entries)")
      ->delimiter(',');
  project_cmd->add_flag("--scaled-criterion", scaled,
                        "Scale the stopping slack by ||x_i - y|| per point");
  project_flags.add_to(*project_cmd, nearest_solvers);

  // distance
  auto* distance_cmd = app.add_subcommand("distance", "Distance between conv(P) and conv(Q)");
  std::string p_path;
  std::string q_path;
  std::vector<Index> init_p;
  std::vector<Index> init_q;
  InnerFlags distance_flags;
  distance_cmd->add_option("--cloud-p", p_path, "First point cloud file")->required();
  distance_cmd->add_option("--cloud-q", q_path, "Second point cloud file")->required();
  distance_cmd->add_option("--init-p", init_p, "Initial P index set (0-based)")->delimiter(',');
  distance_cmd->add_option("--init-q", init_q, "Initial Q index set (0-based)")->delimiter(',');
  distance_flags.add_to(*distance_cmd, pair_solvers);

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Run a generated experiment grid");
  SuiteConfig suite;
  std::string kind = "nearest";
  std::string modes = "both";
  std::optional<double> bench_eta;
  std::string out_path;
  std::string plot_path;
  bench_cmd->add_option("--kind", kind, "nearest | distance")
      ->check(CLI::IsMember({"nearest", "distance"}));
  bench_cmd->add_option("--d", suite.dims, "Dimensions")->delimiter(',');
  bench_cmd->add_option("--ell", suite.ells, "Cloud sizes")->delimiter(',');
  bench_cmd->add_option("--trials", suite.trials, "Trials per cell")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--solvers", suite.solvers, "Inner solvers")
      ->delimiter(',')
      ->check(CLI::IsMember(pair_solvers));
  bench_cmd->add_option("--modes", modes, "plain | accel | both")
      ->check(CLI::IsMember({"plain", "accel", "both"}));
  bench_cmd->add_option("--eta", bench_eta, "Outer stopping slack")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", suite.master_seed, "Master seed");
  bench_cmd->add_option("--timeout", suite.timeout_s, "Per-run limit in seconds")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--out", out_path, "CSV output (default: stdout)");
  bench_cmd->add_option("--plotdata", plot_path, "Grouped mean-time series output");
  bench_cmd->add_flag("--serial", suite.serial, "Run on one thread (required for timing claims)");
  bench_cmd->add_option("--threads", suite.threads, "Worker threads (0: all cores)");

  // gen
  auto* gen_cmd = app.add_subcommand("gen", "Write a generated instance");
  std::string gen_kind = "nearest";
  std::size_t gen_d = 3;
  std::size_t gen_ell = 100;
  std::uint64_t gen_seed = 1;
  std::string gen_out_p;
  std::string gen_out_q;
  gen_cmd->add_option("--kind", gen_kind, "nearest | distance")
      ->check(CLI::IsMember({"nearest", "distance"}));
  gen_cmd->add_option("--d", gen_d, "Dimension")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--ell", gen_ell, "Points per cloud")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen_seed, "Instance seed");
  gen_cmd->add_option("--out", gen_out_p, "Cloud (or P cloud) output (default: stdout)");
  gen_cmd->add_option("--out-q", gen_out_q, "Q cloud output for --kind distance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (*project_cmd) return run_project(cloud_path, z_arg, init, scaled, project_flags);
    if (*distance_cmd) return run_distance(p_path, q_path, init_p, init_q, distance_flags);
    if (*bench_cmd) {
      suite.kind = parse_problem_kind(kind);
      suite.eta = bench_eta;
      if (modes == "plain") suite.modes = {false};
      if (modes == "accel") suite.modes = {true};
      if (suite.kind == ProblemKind::nearest) {
        for (const auto& s : suite.solvers) {
          if (s == "pairqp") throw std::invalid_argument("pairqp applies to --kind distance only");
        }
      }
      const auto records = run_suite(suite);
      if (out_path.empty()) {
        emit_csv(std::cout, records);
      } else {
        emit_csv(out_path, records);
      }
      if (!plot_path.empty()) emit_plotdata(plot_path, records);
      print_summary(out_path.empty() ? std::cerr : std::cout, records);
      return kOk;
    }
    if (*gen_cmd) {
      const ProblemInstance inst = parse_problem_kind(gen_kind) == ProblemKind::nearest
                                       ? gen_compressed_cube(gen_d, gen_ell, gen_seed)
                                       : gen_two_cubes(gen_d, gen_ell, gen_seed);
      if (gen_out_p.empty()) {
        write_point_cloud(std::cout, inst.cloud_p);
      } else {
        write_point_cloud(gen_out_p, inst.cloud_p);
      }
      if (inst.cloud_q) {
        if (gen_out_q.empty()) throw std::invalid_argument("--kind distance needs --out-q");
        write_point_cloud(gen_out_q, *inst.cloud_q);
      }
      return kOk;
    }
  } catch (const ParseError& e) {
    std::cerr << "polyproj: input error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "polyproj: input error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::out_of_range& e) {
    std::cerr << "polyproj: input error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::length_error& e) {
    std::cerr << "polyproj: input too large: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "polyproj: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
