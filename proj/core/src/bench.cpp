#include "polyproj/bench.hpp"

#include "polyproj/accel_distance.hpp"
#include "polyproj/accel_nearest.hpp"
#include "polyproj/point_cloud_io.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

namespace polyproj {

BenchRecord run_one(const ProblemInstance& instance, const std::string& solver, bool accelerated,
                    double eta, double timeout_s) {
  BenchRecord rec;
  rec.d = instance.d;
  rec.ell = instance.ell;
  rec.solver = solver;
  rec.accelerated = accelerated;
  rec.seed = instance.seed;
  rec.result_value = std::numeric_limits<double>::quiet_NaN();

  const auto start = Clock::now();
  const auto deadline =
      start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(timeout_s));
  try {
    if (instance.kind == ProblemKind::nearest) {
      ProjectOptions opts;
      opts.solver = solver;
      opts.eta = eta;
      opts.accelerated = accelerated;
      opts.deadline = deadline;
      const SolveReport r = project(instance.z, instance.cloud_p, opts);
      rec.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
      rec.outer_iters = r.outer_iterations;
      rec.inner_iters = r.inner_iterations;
      rec.status = to_string(r.termination);
      rec.corrections_step3 = r.corrections_step3;
      rec.corrections_step4 = r.corrections_step4;
      rec.final_criterion = r.final_worst_value;
      rec.message = r.diagnostic;
      if (r.termination == Termination::optimal_eta) rec.result_value = (r.projection - instance.z).norm();
    } else {
      DistanceOptions opts;
      opts.solver = solver;
      opts.eta = eta;
      opts.accelerated = accelerated;
      opts.deadline = deadline;
      const PairReport r = distance(instance.cloud_p, *instance.cloud_q, opts);
      rec.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
      rec.outer_iters = r.outer_iterations;
      rec.inner_iters = r.inner_iterations;
      rec.status = to_string(r.termination);
      rec.pair_corrections = r.corrections;
      rec.final_criterion = std::min(r.rho_x, r.rho_y);
      rec.message = r.diagnostic;
      if (r.termination == Termination::optimal_eta) rec.result_value = r.distance;
    }
  } catch (const std::exception& e) {
    rec.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
    rec.status = "error";
    rec.message = e.what();
  }
  return rec;
}

std::vector<BenchRecord> run_suite(const SuiteConfig& config) {
  struct Task {
    std::size_t d, ell, trial;
    std::string solver;
    bool accelerated;
  };
  std::vector<Task> tasks;
  for (auto d : config.dims) {
    for (auto ell : config.ells) {
      for (std::size_t t = 0; t < config.trials; ++t) {
        for (const auto& s : config.solvers) {
          for (bool mode : config.modes) tasks.push_back({d, ell, t, s, mode});
        }
      }
    }
  }

  std::vector<BenchRecord> out(tasks.size());
  auto run_task = [&](std::size_t k) {
    const Task& task = tasks[k];
    const std::uint64_t seed = derive_seed(config.master_seed, task.d, task.ell, task.trial);
    const ProblemInstance inst = config.kind == ProblemKind::nearest
                                     ? gen_compressed_cube(task.d, task.ell, seed)
                                     : gen_two_cubes(task.d, task.ell, seed);
    const double eta = config.eta.value_or(
        config.kind == ProblemKind::nearest ? default_eta(task.d) : 1e-4);
    out[k] = run_one(inst, task.solver, task.accelerated, eta, config.timeout_s);
    out[k].trial = task.trial;
  };

  std::size_t workers = config.serial ? 1 : config.threads;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<std::size_t>(1, tasks.size()));
  if (workers == 1) {
    for (std::size_t k = 0; k < tasks.size(); ++k) run_task(k);
    return out;
  }
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < tasks.size(); k = next++) run_task(k);
      });
    }
  }
  return out;
}

std::vector<CellSummary> summarize(const std::vector<BenchRecord>& records) {
  std::map<std::tuple<std::size_t, std::size_t, std::string, bool>, CellSummary> cells;
  for (const auto& r : records) {
    auto& c = cells[{r.d, r.ell, r.solver, r.accelerated}];
    c.d = r.d;
    c.ell = r.ell;
    c.solver = r.solver;
    c.accelerated = r.accelerated;
    ++c.runs;
    if (std::isnan(r.result_value)) {
      ++c.failures;
      continue;
    }
    c.mean_time += r.wall_time;
    c.mean_outer += static_cast<double>(r.outer_iters);
    c.mean_inner += static_cast<double>(r.inner_iters);
  }
  std::vector<CellSummary> out;
  for (auto& [key, c] : cells) {
    const auto ok = static_cast<double>(c.runs - c.failures);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    c.mean_time = ok > 0 ? c.mean_time / ok : nan;
    c.mean_outer = ok > 0 ? c.mean_outer / ok : nan;
    c.mean_inner = ok > 0 ? c.mean_inner / ok : nan;
    out.push_back(c);
  }
  return out;
}

void emit_csv(std::ostream& out, const std::vector<BenchRecord>& records) {
  out << csv_header << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : records) {
    out << r.d << ',' << r.ell << ',' << r.solver << ',' << (r.accelerated ? "true" : "false")
        << ',' << r.trial << ',' << r.seed << ',' << r.wall_time << ',' << r.outer_iters << ','
        << r.inner_iters << ',';
    if (std::isnan(r.result_value)) {
      out << "nan";
    } else {
      out << r.result_value;
    }
    out << '\n';
  }
}

void emit_csv(const std::filesystem::path& path, const std::vector<BenchRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  emit_csv(out, records);
}

namespace {

template <class T>
T parse_field(std::string_view tok, std::size_t line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw ParseError(line, "bad field '" + std::string(tok) + "'");
  }
  return value;
}

}  // namespace

std::vector<BenchRecord> parse_csv(std::string_view text) {
  std::vector<BenchRecord> out;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != csv_header) throw ParseError(line_no, "unexpected csv header");
      header_seen = true;
      continue;
    }
    std::vector<std::string_view> f;
    for (std::size_t pos = 0;;) {
      const auto c = line.find(',', pos);
      f.push_back(line.substr(pos, c == std::string_view::npos ? std::string_view::npos : c - pos));
      if (c == std::string_view::npos) break;
      pos = c + 1;
    }
    if (f.size() != 10) throw ParseError(line_no, "expected 10 fields");
    BenchRecord r;
    r.d = parse_field<std::size_t>(f[0], line_no);
    r.ell = parse_field<std::size_t>(f[1], line_no);
    r.solver = std::string(f[2]);
    if (f[3] != "true" && f[3] != "false") throw ParseError(line_no, "bad accelerated flag");
    r.accelerated = f[3] == "true";
    r.trial = parse_field<std::size_t>(f[4], line_no);
    r.seed = parse_field<std::uint64_t>(f[5], line_no);
    r.wall_time = parse_field<double>(f[6], line_no);
    r.outer_iters = parse_field<std::size_t>(f[7], line_no);
    r.inner_iters = parse_field<std::size_t>(f[8], line_no);
    r.result_value = parse_field<double>(f[9], line_no);
    out.push_back(std::move(r));
  }
  if (!header_seen) throw ParseError(0, "empty csv");
  return out;
}

void emit_plotdata(std::ostream& out, const std::vector<BenchRecord>& records) {
  // (d, solver) -> ell -> (plain, accelerated) mean times
  std::map<std::pair<std::size_t, std::string>, std::map<std::size_t, std::pair<double, double>>>
      series;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& c : summarize(records)) {
    auto& cell = series[{c.d, c.solver}].try_emplace(c.ell, nan, nan).first->second;
    (c.accelerated ? cell.second : cell.first) = c.mean_time;
  }
  out << "d,solver,ell,plain_mean_time,accel_mean_time,speedup\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& [key, by_ell] : series) {
    for (const auto& [ell, times] : by_ell) {
      out << key.first << ',' << key.second << ',' << ell << ',' << times.first << ','
          << times.second << ',' << times.first / times.second << '\n';
    }
  }
}

void emit_plotdata(const std::filesystem::path& path, const std::vector<BenchRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  emit_plotdata(out, records);
}

}  // namespace polyproj
