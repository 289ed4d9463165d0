#pragma once

// Nearest-point solvers for min ||x - w|| over conv{x_i : i in indices}.
// All return weights aligned with the given index list (zeros included).

#include "polyproj/geometry.hpp"

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace polyproj {

using Clock = std::chrono::steady_clock;
using Deadline = std::optional<Clock::time_point>;

enum class StopReason { tolerance, iteration_cap, timeout };

std::string_view to_string(StopReason r) noexcept;

struct SolverStats {
  std::size_t inner_iterations = 0;
  StopReason terminated_by = StopReason::tolerance;

  void merge(const SolverStats& other);
};

struct SolverConfig {
  double epsilon = 1e-10;
  std::size_t max_iter = 1'000'000;
};

class NearestPointSolver {
 public:
  virtual ~NearestPointSolver() = default;

  /// Throws std::invalid_argument on empty or duplicate indices or a
  /// dimension mismatch, std::out_of_range on a bad index.
  ConvexCoefficients solve(const Vector& w, std::span<const Index> indices,
                           const PointCloud& cloud, SolverStats* stats = nullptr,
                           Deadline deadline = {}) const;

  virtual std::string_view name() const noexcept = 0;
  /// Slack, in units of <y - w, x_i - y>, that the solver's own stopping rule
  /// leaves on its subproblem.
  virtual double accuracy() const noexcept = 0;
  virtual std::unique_ptr<NearestPointSolver> clone() const = 0;

  const SolverConfig& config() const noexcept { return config_; }
  SolverConfig& config() noexcept { return config_; }

 protected:
  explicit NearestPointSolver(SolverConfig config) : config_(config) {}
  virtual Vector do_solve(const Vector& w, std::span<const Index> indices,
                          const PointCloud& cloud, SolverStats& stats,
                          Deadline deadline) const = 0;

 private:
  SolverConfig config_;
};

/// Wolfe's minimum-norm-point method with major/minor cycles.
class WolfeSolver final : public NearestPointSolver {
 public:
  /// Called whenever the working set or its weights settle, with the
  /// working set in insertion order and its weights.
  using Observer = std::function<void(const IndexList& working_set, const Vector& weights)>;

  explicit WolfeSolver(SolverConfig config = {1e-10, 1'000'000}) : NearestPointSolver(config) {}
  std::string_view name() const noexcept override { return "wolfe"; }
  double accuracy() const noexcept override { return config().epsilon; }
  std::unique_ptr<NearestPointSolver> clone() const override;

  void set_observer(Observer obs) { observer_ = std::move(obs); }

 protected:
  Vector do_solve(const Vector& w, std::span<const Index> indices, const PointCloud& cloud,
                  SolverStats& stats, Deadline deadline) const override;

 private:
  Observer observer_;
};

/// Mitchell-Demyanov-Malozemov weight-transfer method.
class MdmSolver final : public NearestPointSolver {
 public:
  explicit MdmSolver(SolverConfig config = {1e-8, 1'000'000}) : NearestPointSolver(config) {}
  std::string_view name() const noexcept override { return "mdm"; }
  double accuracy() const noexcept override { return config().epsilon; }
  std::unique_ptr<NearestPointSolver> clone() const override;

 protected:
  Vector do_solve(const Vector& w, std::span<const Index> indices, const PointCloud& cloud,
                  SolverStats& stats, Deadline deadline) const override;
};

/// Active-set QP on the explicit Gram matrix of the translated points.
/// epsilon is unused; max_iter bounds active-set changes.
class QpSolver final : public NearestPointSolver {
 public:
  explicit QpSolver(SolverConfig config = {0.0, 100'000}) : NearestPointSolver(config) {}
  std::string_view name() const noexcept override { return "qp"; }
  double accuracy() const noexcept override { return 1e-12; }
  std::unique_ptr<NearestPointSolver> clone() const override;

  /// Largest index list accepted (the Gram matrix is n x n doubles).
  static constexpr std::size_t max_points = 12'000;

 protected:
  Vector do_solve(const Vector& w, std::span<const Index> indices, const PointCloud& cloud,
                  SolverStats& stats, Deadline deadline) const override;
};

/// Brute force over every support of size <= d+1. Small inputs only.
class OracleSolver final : public NearestPointSolver {
 public:
  static constexpr std::size_t max_points = 12;
  static constexpr std::size_t max_dim = 4;

  explicit OracleSolver(SolverConfig config = {0.0, 0}) : NearestPointSolver(config) {}
  std::string_view name() const noexcept override { return "oracle"; }
  double accuracy() const noexcept override { return 1e-12; }
  std::unique_ptr<NearestPointSolver> clone() const override;

 protected:
  Vector do_solve(const Vector& w, std::span<const Index> indices, const PointCloud& cloud,
                  SolverStats& stats, Deadline deadline) const override;
};

/// "wolfe" | "mdm" | "qp" | "oracle". Throws std::invalid_argument otherwise.
std::unique_ptr<NearestPointSolver> make_solver(std::string_view name);
const std::vector<std::string>& solver_names();

}  // namespace polyproj
