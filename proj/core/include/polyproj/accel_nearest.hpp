#pragma once

// Accelerated projection of z onto conv{x_1..x_l}: an inner solver only ever
// sees a (d+1)-point subpolytope, which is shifted one vertex at a time until
// the full-cloud optimality test holds.

#include "polyproj/inner_solvers.hpp"

#include <optional>
#include <string>
#include <vector>

namespace polyproj {

enum class Termination { optimal_eta, iteration_cap, correction_failure, timeout };

std::string_view to_string(Termination t) noexcept;

struct SubpolytopeState {
  IndexList index_set;      // sorted ascending
  ConvexCoefficients coeffs;  // support == index_set
  Vector trial_point;
  double theta = 0.0;       // ||trial_point - z||
  std::size_t outer_iter = 0;
  bool correction_attempted = false;
};

/// Builds a consistent state from weights aligned with a sorted index set.
SubpolytopeState make_state(IndexList index_set, Vector weights, const Vector& z,
                            const PointCloud& cloud, std::size_t outer_iter = 0);

enum class RemovalRule {
  min_weight,     // smallest weight, smallest index on ties
  index_removal,  // a zero weight if any, otherwise a Caratheodory reduction
};

struct ExchangeDecision {
  Index remove_index = 0;
  Index insert_index = 0;
  bool inconsistent = false;  // insert_index already in the index set
};

/// Removes per `rule`, inserts the global argmin of <y - z, x_i>.
ExchangeDecision steepest_descent_exchange(const SubpolytopeState& state, const Vector& z,
                                           const PointCloud& cloud,
                                           RemovalRule rule = RemovalRule::min_weight,
                                           double eps_zero = 1e-12);

/// An index k with y = sum alpha_i x_i still in conv{x_i : i != k}.
/// Falls back to the smallest weight when the points are affinely independent
/// within rounding (the removal is then only approximate).
Index index_removal(std::span<const Index> indices, const PointCloud& cloud,
                    const Vector& weights, double eps_zero = 1e-12);

/// Index set after removing `remove` and inserting `insert`, kept sorted.
IndexList exchanged(const IndexList& index_set, Index remove, Index insert);

enum class CorrectionBranch { none, blend, adopt, caratheodory };

std::string_view to_string(CorrectionBranch b) noexcept;

struct CorrectionOutcome {
  CorrectionBranch branch = CorrectionBranch::none;
  bool ok = false;
  double coefficient_min = 0.0;  // smallest affine-projection coefficient
  std::string diagnostic;
};

/// Restores a zero weight on the current subpolytope without increasing theta:
/// projects z onto the affine hull, then blends toward it, adopts it, or
/// performs a Caratheodory reduction. `previous_theta` is the theta of the
/// previous accepted iterate, if any; it bounds the Caratheodory step.
/// On failure the state is left unchanged.
CorrectionOutcome correct_coefficients(SubpolytopeState& state, const Vector& z,
                                       const PointCloud& cloud, const Tolerances& tol,
                                       std::optional<double> previous_theta);

/// True iff the sequence is strictly decreasing.
bool decay_audit(std::span<const double> thetas);

struct IterationRecord {
  std::size_t n = 0;
  IndexList index_set;
  double theta = 0.0;
  Index worst_index = 0;
  double worst_value = 0.0;
  bool step3 = false;  // a blend/adopt correction preceded this check
  bool step4 = false;  // a Caratheodory correction preceded this check
};

struct SolveReport {
  Vector projection;
  ConvexCoefficients coeffs_global;
  std::size_t outer_iterations = 0;
  std::size_t corrections_step3 = 0;
  std::size_t corrections_step4 = 0;
  Termination termination = Termination::optimal_eta;
  double final_worst_value = 0.0;
  std::size_t inner_iterations = 0;
  std::vector<double> theta_trace;      // one entry per accepted iterate
  std::vector<IndexList> visited;       // accepted index sets, in order
  bool repeated_index_set = false;
  std::vector<IterationRecord> iterations;  // filled when tracing
  std::string diagnostic;
};

struct MetaOptions {
  Tolerances tol;
  IndexList init;  // empty: the first d+1 indices
  bool trace = false;
  bool scaled_criterion = false;
  Deadline deadline;
};

/// Exact-arithmetic variant: stops on the optimality test with a slack that
/// only covers rounding and the inner solver's accuracy, and removes indices
/// with the index removal method. No decrease check; an inexact solver can
/// make it cycle until max_outer.
SolveReport meta_project_ideal(const Vector& z, const PointCloud& cloud,
                               const NearestPointSolver& solver, const MetaOptions& opts);

/// Inexact-solver variant: stops on the eta-relaxed test, accepts an exchange
/// only on strict theta decrease, and corrects coefficients otherwise.
SolveReport meta_project_robust(const Vector& z, const PointCloud& cloud,
                                const NearestPointSolver& solver, const MetaOptions& opts);

/// One solver call over the whole cloud.
SolveReport solve_directly(const Vector& z, const PointCloud& cloud,
                           const NearestPointSolver& solver, const MetaOptions& opts);

struct ProjectOptions {
  std::string solver = "qp";
  std::optional<double> eta;  // default_eta(d) when empty
  IndexList init;
  std::size_t max_outer = 100'000;
  bool trace = false;
  bool accelerated = true;
  bool ideal = false;
  bool scaled_criterion = false;
  std::optional<double> inner_epsilon;
  std::optional<std::size_t> inner_max_iter;
  Deadline deadline;
};

SolveReport project(const Vector& z, const PointCloud& cloud, const ProjectOptions& opts);

}  // namespace polyproj
