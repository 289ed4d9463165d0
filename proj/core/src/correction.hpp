#pragma once

// Single-side coefficient correction shared by the nearest-point and the
// distance meta-algorithms.

#include "polyproj/accel_nearest.hpp"

#include <optional>
#include <span>
#include <string>

namespace polyproj::detail {

struct SideCorrection {
  CorrectionBranch branch = CorrectionBranch::none;
  bool ok = false;
  double coefficient_min = 0.0;
  Vector weights;
  std::string diagnostic;
};

/// `alpha` describes the current point y over `indices`; `current_dist` is
/// ||y - target||. `budget`, when set, bounds step * residual of a
/// Caratheodory reduction.
SideCorrection correct_side(std::span<const Index> indices, const Vector& alpha,
                            const PointCloud& cloud, const Vector& target, double current_dist,
                            const Tolerances& tol, std::optional<double> budget);

/// Zeroes position `zero_at`, clamps negatives and renormalises.
Vector settle_weights(Vector w, Eigen::Index zero_at);

/// Largest ||x_i - x_j|| over the index list, at least 1.
double local_scale(std::span<const Index> indices, const PointCloud& cloud);

/// Sorted initial index set: `init`, or 0..d when empty. Throws on a wrong
/// size, duplicates or an out-of-range index.
IndexList initial_set(const IndexList& init, std::size_t d, std::size_t l);

}  // namespace polyproj::detail
