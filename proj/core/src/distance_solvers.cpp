#include "polyproj/distance_solvers.hpp"

#include "polyproj/simplex_qp.hpp"

#include <stdexcept>
#include <string>

namespace polyproj {

namespace {

Vector normalised(Vector v) {
  v = v.cwiseMax(0.0);
  const double s = v.sum();
  if (!(s > 0.0)) throw std::logic_error("distance solver: weights vanished");
  return v / s;
}

}  // namespace

PairCoefficients DistanceSolver::solve_pair(std::span<const Index> indices_p,
                                            const PointCloud& cloud_p,
                                            std::span<const Index> indices_q,
                                            const PointCloud& cloud_q, SolverStats* stats,
                                            Deadline deadline) const {
  if (cloud_p.dim() != cloud_q.dim()) {
    throw std::invalid_argument("solve_pair: clouds differ in dimension");
  }
  if (indices_p.empty() || indices_q.empty()) {
    throw std::invalid_argument("solve_pair: empty index list");
  }
  for (Index i : indices_p) {
    if (i >= cloud_p.size()) throw std::out_of_range("solve_pair: index out of range");
  }
  for (Index j : indices_q) {
    if (j >= cloud_q.size()) throw std::out_of_range("solve_pair: index out of range");
  }
  SolverStats local;
  PairCoefficients out = do_solve_pair(indices_p, cloud_p, indices_q, cloud_q, local, deadline);
  out.p.weights = normalised(std::move(out.p.weights));
  out.q.weights = normalised(std::move(out.q.weights));
  if (stats) stats->merge(local);
  return out;
}

ReductionDistanceSolver::ReductionDistanceSolver(std::unique_ptr<NearestPointSolver> inner,
                                                 std::size_t product_cap)
    : inner_(std::move(inner)), product_cap_(product_cap) {
  if (!inner_) throw std::invalid_argument("ReductionDistanceSolver: null inner solver");
}

PointCloud ReductionDistanceSolver::difference_cloud(std::span<const Index> indices_p,
                                                     const PointCloud& cloud_p,
                                                     std::span<const Index> indices_q,
                                                     const PointCloud& cloud_q) {
  const auto rows = static_cast<Eigen::Index>(indices_p.size() * indices_q.size());
  PointCloud::Matrix diff(rows, static_cast<Eigen::Index>(cloud_p.dim()));
  Eigen::Index r = 0;
  for (Index i : indices_p) {
    for (Index j : indices_q) {
      diff.row(r++) = (cloud_p.point(i) - cloud_q.point(j)).transpose();
    }
  }
  return PointCloud(std::move(diff));
}

PairCoefficients ReductionDistanceSolver::do_solve_pair(std::span<const Index> indices_p,
                                                        const PointCloud& cloud_p,
                                                        std::span<const Index> indices_q,
                                                        const PointCloud& cloud_q,
                                                        SolverStats& stats,
                                                        Deadline deadline) const {
  const std::size_t np = indices_p.size();
  const std::size_t nq = indices_q.size();
  if (np * nq > product_cap_) {
    throw std::length_error("reduction: difference cloud of " + std::to_string(np * nq) +
                            " points exceeds the cap of " + std::to_string(product_cap_));
  }
  const PointCloud diff = difference_cloud(indices_p, cloud_p, indices_q, cloud_q);
  IndexList all(diff.size());
  for (Index k = 0; k < all.size(); ++k) all[k] = k;
  const ConvexCoefficients mu =
      inner_->solve(Vector::Zero(static_cast<Eigen::Index>(diff.dim())), all, diff, &stats, deadline);

  PairCoefficients out{{IndexList(indices_p.begin(), indices_p.end()),
                        Vector::Zero(static_cast<Eigen::Index>(np))},
                       {IndexList(indices_q.begin(), indices_q.end()),
                        Vector::Zero(static_cast<Eigen::Index>(nq))}};
  for (std::size_t a = 0; a < np; ++a) {
    for (std::size_t b = 0; b < nq; ++b) {
      const double m = mu.weights[static_cast<Eigen::Index>(a * nq + b)];
      out.p.weights[static_cast<Eigen::Index>(a)] += m;
      out.q.weights[static_cast<Eigen::Index>(b)] += m;
    }
  }
  return out;
}

PairCoefficients PairQpSolver::do_solve_pair(std::span<const Index> indices_p,
                                             const PointCloud& cloud_p,
                                             std::span<const Index> indices_q,
                                             const PointCloud& cloud_q, SolverStats& stats,
                                             Deadline deadline) const {
  const std::size_t np = indices_p.size();
  const std::size_t nq = indices_q.size();
  if (np + nq > QpSolver::max_points) {
    throw std::length_error("pairqp: " + std::to_string(np + nq) +
                            " variables exceed the dense Gram limit");
  }
  // Columns x_i - c and c - y_j; the objective ||sum a_i x_i - sum b_j y_j||^2 / 2
  // does not depend on c, which only keeps the Gram entries small.
  const Vector c = cloud_p.point(indices_p[0]);
  Eigen::MatrixXd cols(static_cast<Eigen::Index>(cloud_p.dim()), static_cast<Eigen::Index>(np + nq));
  std::vector<int> group(np + nq, 0);
  for (std::size_t a = 0; a < np; ++a) cols.col(static_cast<Eigen::Index>(a)) = cloud_p.point(indices_p[a]) - c;
  for (std::size_t b = 0; b < nq; ++b) {
    cols.col(static_cast<Eigen::Index>(np + b)) = c - cloud_q.point(indices_q[b]);
    group[np + b] = 1;
  }
  const Eigen::MatrixXd gram = cols.transpose() * cols;
  const auto res = solve_simplex_qp(gram, group, 2, max_iter_, deadline);
  stats.inner_iterations += res.iterations;
  if (res.timed_out) {
    stats.terminated_by = StopReason::timeout;
  } else if (!res.converged) {
    stats.terminated_by = StopReason::iteration_cap;
  }
  return {{IndexList(indices_p.begin(), indices_p.end()), res.u.head(static_cast<Eigen::Index>(np))},
          {IndexList(indices_q.begin(), indices_q.end()), res.u.tail(static_cast<Eigen::Index>(nq))}};
}

std::unique_ptr<DistanceSolver> make_distance_solver(std::string_view name) {
  if (name == "pairqp") return std::make_unique<PairQpSolver>();
  return std::make_unique<ReductionDistanceSolver>(make_solver(name));
}

}  // namespace polyproj
