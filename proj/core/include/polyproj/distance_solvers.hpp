#pragma once

// Solvers for the distance between conv{x_i : i in I} and conv{y_j : j in J}.

#include "polyproj/inner_solvers.hpp"

#include <memory>
#include <string_view>

namespace polyproj {

struct PairCoefficients {
  ConvexCoefficients p;  // over the first cloud
  ConvexCoefficients q;  // over the second cloud
};

class DistanceSolver {
 public:
  virtual ~DistanceSolver() = default;

  /// Weights are aligned with the given index lists. Throws as
  /// NearestPointSolver::solve, plus on clouds of different dimension.
  PairCoefficients solve_pair(std::span<const Index> indices_p, const PointCloud& cloud_p,
                              std::span<const Index> indices_q, const PointCloud& cloud_q,
                              SolverStats* stats = nullptr, Deadline deadline = {}) const;

  virtual std::string_view name() const noexcept = 0;
  /// Slack left on the pair criterion by the solver's own stopping rule.
  virtual double accuracy() const noexcept = 0;

 protected:
  virtual PairCoefficients do_solve_pair(std::span<const Index> indices_p,
                                         const PointCloud& cloud_p,
                                         std::span<const Index> indices_q,
                                         const PointCloud& cloud_q, SolverStats& stats,
                                         Deadline deadline) const = 0;
};

/// Projects the origin onto the difference cloud {x_i - y_j} with a
/// nearest-point solver, then takes marginals of the difference weights.
class ReductionDistanceSolver final : public DistanceSolver {
 public:
  explicit ReductionDistanceSolver(std::unique_ptr<NearestPointSolver> inner,
                                   std::size_t product_cap = 2'000'000);

  std::string_view name() const noexcept override { return inner_->name(); }
  double accuracy() const noexcept override { return inner_->accuracy(); }
  const NearestPointSolver& inner() const noexcept { return *inner_; }
  NearestPointSolver& inner() noexcept { return *inner_; }

  /// Difference cloud in (i, j) lexicographic order over the index lists.
  static PointCloud difference_cloud(std::span<const Index> indices_p, const PointCloud& cloud_p,
                                     std::span<const Index> indices_q, const PointCloud& cloud_q);

 protected:
  PairCoefficients do_solve_pair(std::span<const Index> indices_p, const PointCloud& cloud_p,
                                 std::span<const Index> indices_q, const PointCloud& cloud_q,
                                 SolverStats& stats, Deadline deadline) const override;

 private:
  std::unique_ptr<NearestPointSolver> inner_;
  std::size_t product_cap_;
};

/// Two-simplex active-set QP on the joint variable (alpha, beta).
class PairQpSolver final : public DistanceSolver {
 public:
  explicit PairQpSolver(std::size_t max_iter = 100'000) : max_iter_(max_iter) {}
  std::string_view name() const noexcept override { return "pairqp"; }
  double accuracy() const noexcept override { return 1e-12; }

 protected:
  PairCoefficients do_solve_pair(std::span<const Index> indices_p, const PointCloud& cloud_p,
                                 std::span<const Index> indices_q, const PointCloud& cloud_q,
                                 SolverStats& stats, Deadline deadline) const override;

 private:
  std::size_t max_iter_;
};

/// "wolfe" | "mdm" | "qp" | "oracle" give the reduction over that solver;
/// "pairqp" gives the joint QP. Throws std::invalid_argument otherwise.
std::unique_ptr<DistanceSolver> make_distance_solver(std::string_view name);

}  // namespace polyproj
