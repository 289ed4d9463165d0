#pragma once

// Primal active-set solver for
//   min 1/2 u' H u   s.t.  sum_{i in group g} u_i = 1 for every g,  u >= 0
// with H symmetric positive semidefinite, given explicitly.

#include <Eigen/Dense>

#include <chrono>
#include <cstddef>
#include <optional>
#include <vector>

namespace polyproj {

struct SimplexQpResult {
  Eigen::VectorXd u;
  std::size_t iterations = 0;
  bool converged = false;
  bool timed_out = false;
};

/// group[i] in [0, groups) assigns variable i to a simplex; every group must
/// be nonempty. Ties in pivoting go to the smallest variable index.
SimplexQpResult solve_simplex_qp(const Eigen::MatrixXd& hessian, const std::vector<int>& group,
                                 int groups, std::size_t max_iter,
                                 std::optional<std::chrono::steady_clock::time_point> deadline = {});

}  // namespace polyproj
