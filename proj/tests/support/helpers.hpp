#pragma once

#include "polyproj/generators.hpp"
#include "polyproj/geometry.hpp"

#include <Eigen/Dense>

#include <cstdint>

namespace testhelp {

/// l points uniform in [-1, 1]^d.
inline polyproj::PointCloud random_cloud(polyproj::SplitMix64& rng, std::size_t d, std::size_t l,
                                         double shift = 0.0) {
  polyproj::PointCloud::Matrix m(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) m(i, k) = rng.uniform(-1.0, 1.0) + (k == 0 ? shift : 0.0);
  }
  return polyproj::PointCloud(std::move(m));
}

inline polyproj::Vector random_point(polyproj::SplitMix64& rng, std::size_t d, double radius) {
  polyproj::Vector v(static_cast<Eigen::Index>(d));
  for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = rng.uniform(-radius, radius);
  return v;
}

inline Eigen::MatrixXd rows(const polyproj::PointCloud& cloud) { return cloud.matrix(); }

inline polyproj::IndexList iota(std::size_t n) {
  polyproj::IndexList out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = i;
  return out;
}

}  // namespace testhelp
