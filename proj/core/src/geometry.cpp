#include "polyproj/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace polyproj {

namespace {

void require_dim(std::size_t expected, Eigen::Index actual, const char* what) {
  if (static_cast<Eigen::Index>(expected) != actual) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (expected " +
                                std::to_string(expected) + ", got " +
                                std::to_string(actual) + ")");
  }
}

void require_indices(std::span<const Index> indices, const PointCloud& cloud, const char* what) {
  for (Index i : indices) {
    if (i >= cloud.size()) {
      throw std::out_of_range(std::string(what) + ": index " + std::to_string(i) +
                              " out of range for cloud of size " + std::to_string(cloud.size()));
    }
  }
}

// Orthonormal basis of {u : sum u = 0} in R^k, as k x (k-1) columns.
Eigen::MatrixXd sum_zero_basis(Eigen::Index k) {
  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(k, 1);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(ones);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(k, k);
  return q.rightCols(k - 1);
}

}  // namespace

PointCloud::PointCloud(Matrix points) : points_(std::move(points)) {
  if (points_.rows() == 0) throw std::invalid_argument("PointCloud: empty cloud");
  if (points_.cols() == 0) throw std::invalid_argument("PointCloud: zero dimension");
  if (!points_.allFinite()) throw std::invalid_argument("PointCloud: non-finite coordinate");
}

PointCloud::PointCloud(std::size_t dim, std::span<const double> coords)
    : PointCloud([&] {
        if (dim == 0) throw std::invalid_argument("PointCloud: zero dimension");
        if (coords.size() % dim != 0) {
          throw std::invalid_argument("PointCloud: coordinate count not a multiple of dim");
        }
        const auto rows = static_cast<Eigen::Index>(coords.size() / dim);
        Matrix m(rows, static_cast<Eigen::Index>(dim));
        std::copy(coords.begin(), coords.end(), m.data());
        return m;
      }()) {}

PointCloud::PointCloud(std::initializer_list<std::initializer_list<double>> rows)
    : PointCloud([&] {
        if (rows.size() == 0) throw std::invalid_argument("PointCloud: empty cloud");
        const auto dim = static_cast<Eigen::Index>(rows.begin()->size());
        Matrix m(static_cast<Eigen::Index>(rows.size()), dim);
        Eigen::Index r = 0;
        for (const auto& row : rows) {
          if (static_cast<Eigen::Index>(row.size()) != dim) {
            throw std::invalid_argument("PointCloud: ragged rows");
          }
          Eigen::Index c = 0;
          for (double v : row) m(r, c++) = v;
          ++r;
        }
        return m;
      }()) {}

PointCloud PointCloud::subset(std::span<const Index> indices) const {
  require_indices(indices, *this, "PointCloud::subset");
  Matrix m(static_cast<Eigen::Index>(indices.size()), points_.cols());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    m.row(static_cast<Eigen::Index>(r)) = points_.row(static_cast<Eigen::Index>(indices[r]));
  }
  return PointCloud(std::move(m));
}

bool ConvexCoefficients::is_valid(double tau_sum) const {
  if (static_cast<Eigen::Index>(support.size()) != weights.size() || support.empty()) return false;
  if ((weights.array() < 0.0).any() || !weights.allFinite()) return false;
  if (std::abs(weights.sum() - 1.0) > tau_sum) return false;
  std::unordered_set<Index> seen(support.begin(), support.end());
  return seen.size() == support.size();
}

double ConvexCoefficients::weight_of(Index cloud_index) const {
  for (std::size_t k = 0; k < support.size(); ++k) {
    if (support[k] == cloud_index) return weights[static_cast<Eigen::Index>(k)];
  }
  return 0.0;
}

ConvexCoefficients ConvexCoefficients::vertex(Index i) {
  return {{i}, Vector::Ones(1)};
}

void Tolerances::validate() const {
  if (!(eta > 0.0)) throw std::invalid_argument("Tolerances: eta must be positive");
  if (!(eps_zero >= 0.0)) throw std::invalid_argument("Tolerances: eps_zero must be >= 0");
  if (!(tau_sum >= 0.0)) throw std::invalid_argument("Tolerances: tau_sum must be >= 0");
  if (max_outer == 0) throw std::invalid_argument("Tolerances: max_outer must be positive");
}

double default_eta(std::size_t dim) noexcept { return dim <= 10 ? 1e-4 : 5e-4; }

Vector evaluate_point(const ConvexCoefficients& coeffs, const PointCloud& cloud) {
  if (static_cast<Eigen::Index>(coeffs.support.size()) != coeffs.weights.size()) {
    throw std::invalid_argument("evaluate_point: support and weights differ in length");
  }
  require_indices(coeffs.support, cloud, "evaluate_point");
  Vector y = Vector::Zero(static_cast<Eigen::Index>(cloud.dim()));
  for (std::size_t k = 0; k < coeffs.support.size(); ++k) {
    y += coeffs.weights[static_cast<Eigen::Index>(k)] * cloud.point(coeffs.support[k]);
  }
  return y;
}

double diameter(const PointCloud& cloud) {
  double best = 0.0;
  const auto& m = cloud.matrix();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < m.rows(); ++j) {
      best = std::max(best, (m.row(i) - m.row(j)).squaredNorm());
    }
  }
  return std::sqrt(best);
}

double squared_scale(const PointCloud& cloud, const Vector& z) {
  require_dim(cloud.dim(), z.size(), "squared_scale");
  const double m = (cloud.matrix().rowwise() - z.transpose()).rowwise().squaredNorm().maxCoeff();
  return std::max(1.0, m);
}

OptimalityCheck check_optimality(const Vector& y, const Vector& z, const PointCloud& cloud,
                                 double eta) {
  require_dim(cloud.dim(), y.size(), "check_optimality");
  require_dim(cloud.dim(), z.size(), "check_optimality");
  const Vector dir = y - z;
  const Vector values = cloud.matrix() * dir;
  Eigen::Index arg = 0;
  values.minCoeff(&arg);  // first minimum, i.e. smallest index on ties
  OptimalityCheck out;
  out.worst_index = static_cast<Index>(arg);
  out.worst_value = values[arg] - dir.dot(y);
  out.satisfied = out.worst_value >= -eta;
  return out;
}

OptimalityCheck check_optimality_scaled(const Vector& y, const Vector& z,
                                        const PointCloud& cloud, double eta) {
  require_dim(cloud.dim(), y.size(), "check_optimality_scaled");
  require_dim(cloud.dim(), z.size(), "check_optimality_scaled");
  const Vector dir = y - z;
  OptimalityCheck out;
  out.worst_value = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < cloud.size(); ++i) {
    const Vector diff = cloud.point(i) - y;
    const double len = diff.norm();
    if (len == 0.0) continue;
    const double ratio = dir.dot(diff) / len;
    if (ratio < out.worst_value) {
      out.worst_value = ratio;
      out.worst_index = i;
    }
  }
  if (!std::isfinite(out.worst_value)) out.worst_value = 0.0;
  out.satisfied = out.worst_value >= -eta;
  return out;
}

PairOptimalityCheck check_pair_optimality(const Vector& v, const Vector& w,
                                          const PointCloud& cloud_p, const PointCloud& cloud_q,
                                          double eta) {
  if (cloud_p.dim() != cloud_q.dim()) {
    throw std::invalid_argument("check_pair_optimality: clouds differ in dimension");
  }
  const auto px = check_optimality(v, w, cloud_p, eta);
  const auto qy = check_optimality(w, v, cloud_q, eta);
  PairOptimalityCheck out;
  out.rho_x = px.worst_value;
  out.rho_y = qy.worst_value;
  out.worst_x = px.worst_index;
  out.worst_y = qy.worst_index;
  out.satisfied = px.satisfied && qy.satisfied;
  return out;
}

AffineProjection project_affine_hull(std::span<const Index> indices, const PointCloud& cloud,
                                     const Vector& target) {
  if (indices.empty()) throw std::invalid_argument("project_affine_hull: empty index list");
  require_indices(indices, cloud, "project_affine_hull");
  require_dim(cloud.dim(), target.size(), "project_affine_hull");

  const auto k = static_cast<Eigen::Index>(indices.size());
  const auto d = static_cast<Eigen::Index>(cloud.dim());
  AffineProjection out;
  if (k == 1) {
    out.beta = Vector::Ones(1);
    out.h = cloud.point(indices[0]);
    return out;
  }

  // Columns are x_i - target; beta = 1/k + Z c with Z an orthonormal basis of
  // the sum-zero subspace, so the minimum-norm c gives the minimum-norm beta.
  Eigen::MatrixXd a(d, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    a.col(c) = cloud.point(indices[static_cast<std::size_t>(c)]) - target;
  }
  const Vector centroid_weights = Vector::Constant(k, 1.0 / static_cast<double>(k));
  const Eigen::MatrixXd basis = sum_zero_basis(k);
  const Eigen::MatrixXd reduced = a * basis;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  cod.setThreshold(1e-12);
  cod.compute(reduced);
  const Vector offset = a * centroid_weights;
  const Vector c = cod.solve(-offset);

  out.beta = centroid_weights + basis * c;
  out.h = Vector::Zero(d);
  for (Eigen::Index i = 0; i < k; ++i) {
    out.h += out.beta[i] * cloud.point(indices[static_cast<std::size_t>(i)]);
  }
  return out;
}

AffineDependence affine_dependence_vector(std::span<const Index> indices, const PointCloud& cloud,
                                          Index pivot, double residual_bound) {
  if (indices.size() < 2) {
    throw std::invalid_argument("affine_dependence_vector: need at least two indices");
  }
  require_indices(indices, cloud, "affine_dependence_vector");
  const auto pivot_it = std::find(indices.begin(), indices.end(), pivot);
  if (pivot_it == indices.end()) {
    throw std::invalid_argument("affine_dependence_vector: pivot not in index list");
  }

  const auto k = static_cast<Eigen::Index>(indices.size());
  const auto d = static_cast<Eigen::Index>(cloud.dim());

  // Null vector of [x_i; 1] as the right singular vector of the smallest
  // singular value; its sum-zero row makes it an affine dependence.
  Eigen::MatrixXd m(d + 1, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    m.col(c).head(d) = cloud.point(indices[static_cast<std::size_t>(c)]);
    m(d, c) = 1.0;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  Vector n = svd.matrixV().col(k - 1);

  AffineDependence out;
  out.pivot_position = static_cast<std::size_t>(pivot_it - indices.begin());
  auto p = static_cast<Eigen::Index>(out.pivot_position);
  if (std::abs(n[p]) <= 1e-12 * n.cwiseAbs().maxCoeff()) {
    n.cwiseAbs().maxCoeff(&p);
    out.pivot_position = static_cast<std::size_t>(p);
  }

  out.gamma = n / (-n[p]);
  double others = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (i != p) others += out.gamma[i];
  }
  if (others != 0.0) {
    for (Eigen::Index i = 0; i < k; ++i) {
      if (i != p) out.gamma[i] /= others;
    }
  }
  others = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (i != p) others += out.gamma[i];
  }
  out.gamma[p] = -others;

  Vector lhs = Vector::Zero(d);
  const Vector xp = cloud.point(indices[out.pivot_position]);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (i == p) continue;
    lhs += out.gamma[i] * (cloud.point(indices[static_cast<std::size_t>(i)]) - xp);
  }
  out.residual = lhs.norm();
  out.dependent = out.residual <= residual_bound;
  return out;
}

ParameterConsistency check_parameter_consistency(double epsilon, double eta, double diam,
                                                 double dist, double theta0) {
  ParameterConsistency out;
  const double first = 2.0 * (diam + dist) * epsilon;
  const double second =
      diam * std::sqrt(std::max(0.0, 2.0 * epsilon * theta0 - epsilon * epsilon));
  out.lower = std::max(first, second);
  out.upper = diam * diam;
  out.ok = out.lower < eta && eta <= out.upper;
  return out;
}

}  // namespace polyproj
