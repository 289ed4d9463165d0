#pragma once

// Dense small-dimension primitives shared by every solver: the point cloud,
// convex-combination coefficients, and the optimality certificates for the
// nearest-point and two-polytope distance problems.

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <vector>

namespace polyproj {

using Vector = Eigen::VectorXd;
using Index = std::size_t;
using IndexList = std::vector<Index>;

/// Ordered set of l points in R^d, stored row-major (one point per row).
/// Indices into the cloud are zero-based.
class PointCloud {
 public:
  using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  /// Throws std::invalid_argument on an empty cloud, zero dimension or a
  /// non-finite coordinate.
  explicit PointCloud(Matrix points);
  PointCloud(std::size_t dim, std::span<const double> row_major_coords);
  PointCloud(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(points_.cols()); }
  std::size_t size() const noexcept { return static_cast<std::size_t>(points_.rows()); }

  auto point(Index i) const { return points_.row(static_cast<Eigen::Index>(i)).transpose(); }
  const Matrix& matrix() const noexcept { return points_; }

  /// Cloud made of the given rows, in the given order.
  PointCloud subset(std::span<const Index> indices) const;

 private:
  Matrix points_;
};

/// Barycentric weights over an index list into some PointCloud.
struct ConvexCoefficients {
  IndexList support;
  Vector weights;

  std::size_t size() const noexcept { return support.size(); }
  /// Nonnegative weights, distinct support, |sum - 1| <= tau_sum.
  bool is_valid(double tau_sum) const;
  double weight_of(Index cloud_index) const;

  static ConvexCoefficients vertex(Index i);
};

struct Tolerances {
  double eta = 1e-4;        // outer stopping slack
  double eps_zero = 1e-12;  // coefficients with |a| <= eps_zero count as zero
  double tau_sum = 1e-12;   // slack on sum(weights) == 1
  std::size_t max_outer = 100000;

  /// Throws std::invalid_argument unless eta > 0, eps_zero >= 0, tau_sum >= 0.
  void validate() const;
};

/// Default outer slack: 1e-4 up to d = 10, 5e-4 above.
double default_eta(std::size_t dim) noexcept;

Vector evaluate_point(const ConvexCoefficients& coeffs, const PointCloud& cloud);

/// Exact max pairwise distance, O(l^2).
double diameter(const PointCloud& cloud);

/// max(1, max_i ||x_i - z||^2): a magnitude used to relax exact-zero tests.
double squared_scale(const PointCloud& cloud, const Vector& z);

struct OptimalityCheck {
  bool satisfied = false;
  Index worst_index = 0;
  double worst_value = 0.0;
};

/// min_i <y - z, x_i - y> against -eta; ties resolve to the smallest index.
OptimalityCheck check_optimality(const Vector& y, const Vector& z, const PointCloud& cloud,
                                 double eta);

/// Variant with the slack scaled per point: <y - z, x_i - y> >= -eta ||x_i - y||.
/// worst_value reports the smallest ratio <y - z, x_i - y> / ||x_i - y||.
OptimalityCheck check_optimality_scaled(const Vector& y, const Vector& z,
                                        const PointCloud& cloud, double eta);

struct PairOptimalityCheck {
  double rho_x = 0.0;
  double rho_y = 0.0;
  Index worst_x = 0;
  Index worst_y = 0;
  bool satisfied = false;
};

PairOptimalityCheck check_pair_optimality(const Vector& v, const Vector& w,
                                          const PointCloud& cloud_p, const PointCloud& cloud_q,
                                          double eta);

struct AffineProjection {
  Vector beta;  // aligned with the index list, sums to 1
  Vector h;     // sum beta_i x_i
};

/// Minimises ||sum beta_i x_i - target|| subject to sum beta_i = 1 with signs
/// unrestricted. Rank-deficient hulls return the minimum-norm beta.
AffineProjection project_affine_hull(std::span<const Index> indices, const PointCloud& cloud,
                                     const Vector& target);

struct AffineDependence {
  Vector gamma;            // aligned with the index list, sums to zero
  std::size_t pivot_position = 0;
  double residual = 0.0;   // || sum_{i != pivot} gamma_i (x_i - x_pivot) ||
  bool dependent = false;  // residual <= bound
};

/// Least-squares solution of sum_{i != p} g_i (x_i - x_p) = 0, sum_{i != p} g_i = 1,
/// completed with g_p = -sum_{i != p} g_i. Falls back to another pivot when the
/// requested one carries no weight in the dependence.
AffineDependence affine_dependence_vector(
    std::span<const Index> indices, const PointCloud& cloud, Index pivot,
    double residual_bound = std::numeric_limits<double>::infinity());

struct ParameterConsistency {
  double lower = 0.0;  // max{2(diam + dist) eps, diam sqrt(max{0, 2 eps theta0 - eps^2})}
  double upper = 0.0;  // diam^2
  bool ok = false;     // lower < eta <= upper
};

/// Sufficient condition linking inner accuracy eps to the outer slack eta.
/// Known to be conservative; only used for diagnostics.
ParameterConsistency check_parameter_consistency(double epsilon, double eta, double diam,
                                                 double dist, double theta0);

}  // namespace polyproj
