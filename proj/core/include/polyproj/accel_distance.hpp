#pragma once

// Accelerated distance between conv P and conv Q: a pair solver only ever
// sees (d+1)-point subpolytopes of each cloud.

#include "polyproj/accel_nearest.hpp"
#include "polyproj/distance_solvers.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace polyproj {

struct PairState {
  IndexList index_set_p;  // sorted ascending
  IndexList index_set_q;
  ConvexCoefficients coeffs_p;
  ConvexCoefficients coeffs_q;
  Vector v;  // point of conv P
  Vector w;  // point of conv Q
  double theta = 0.0;  // ||v - w||
  double rho_x = 0.0;  // filled by the optimality test
  double rho_y = 0.0;
  std::size_t outer_iter = 0;
  bool correction_attempted = false;
};

PairState make_pair_state(IndexList index_set_p, Vector weights_p, IndexList index_set_q,
                          Vector weights_q, const PointCloud& cloud_p, const PointCloud& cloud_q,
                          std::size_t outer_iter = 0);

struct PairRemoval {
  std::optional<Index> p;
  std::optional<Index> q;
};

/// Per requested side: a zero-weight index if any, otherwise a Caratheodory
/// reduction of that side's support.
PairRemoval pair_index_removal(const PairState& state, const PointCloud& cloud_p,
                               const PointCloud& cloud_q, bool remove_p, bool remove_q,
                               double eps_zero = 1e-12);

struct PairCorrectionOutcome {
  CorrectionBranch branch_p = CorrectionBranch::none;
  CorrectionBranch branch_q = CorrectionBranch::none;
  bool ok = false;
  std::string diagnostic;
};

/// Restores a zero weight on each corrected side without increasing theta.
/// The P side is corrected only when rho_x < -eta; the Q side is always
/// corrected, toward the already-updated v. Sides marked `fixed` (whole
/// cloud, never exchanged) and single-point sides are skipped.
/// On failure the state is left unchanged.
PairCorrectionOutcome coefficients_correction(PairState& state, const PointCloud& cloud_p,
                                              const PointCloud& cloud_q, const Tolerances& tol,
                                              std::optional<double> previous_theta,
                                              bool fixed_p = false, bool fixed_q = false);

struct PairIterationRecord {
  std::size_t n = 0;
  IndexList index_set_p;
  IndexList index_set_q;
  double theta = 0.0;
  double rho_x = 0.0;
  double rho_y = 0.0;
  CorrectionBranch corrected_p = CorrectionBranch::none;  // correction preceding this check
  CorrectionBranch corrected_q = CorrectionBranch::none;
};

struct PairReport {
  Vector v;
  Vector w;
  double distance = 0.0;
  ConvexCoefficients coeffs_p;
  ConvexCoefficients coeffs_q;
  std::size_t outer_iterations = 0;
  std::size_t corrections = 0;
  Termination termination = Termination::optimal_eta;
  double rho_x = 0.0;
  double rho_y = 0.0;
  std::size_t inner_iterations = 0;
  std::vector<double> theta_trace;
  std::vector<std::pair<IndexList, IndexList>> visited;
  bool repeated_index_pair = false;
  std::vector<PairIterationRecord> iterations;  // filled when tracing
  std::string diagnostic;
};

struct DistanceMetaOptions {
  Tolerances tol;
  IndexList init_p;  // empty: the first d+1 indices
  IndexList init_q;
  bool trace = false;
  Deadline deadline;
};

/// A cloud with at most d+1 points is used whole and never exchanged.
PairReport meta_distance_ideal(const PointCloud& cloud_p, const PointCloud& cloud_q,
                               const DistanceSolver& solver, const DistanceMetaOptions& opts);
PairReport meta_distance_robust(const PointCloud& cloud_p, const PointCloud& cloud_q,
                                const DistanceSolver& solver, const DistanceMetaOptions& opts);
PairReport solve_pair_directly(const PointCloud& cloud_p, const PointCloud& cloud_q,
                               const DistanceSolver& solver, const DistanceMetaOptions& opts);

struct DistanceOptions {
  /// "wolfe" | "mdm" | "qp" | "oracle" | "pairqp". Without acceleration "qp"
  /// runs the joint QP, since the reduction would need an (lm)^2 Gram matrix.
  std::string solver = "qp";
  double eta = 1e-4;
  IndexList init_p;
  IndexList init_q;
  std::size_t max_outer = 100'000;
  bool trace = false;
  bool accelerated = true;
  bool ideal = false;
  std::optional<double> inner_epsilon;
  std::optional<std::size_t> inner_max_iter;
  Deadline deadline;
};

PairReport distance(const PointCloud& cloud_p, const PointCloud& cloud_q,
                    const DistanceOptions& opts);

}  // namespace polyproj
