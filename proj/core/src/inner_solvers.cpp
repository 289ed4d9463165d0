#include "polyproj/inner_solvers.hpp"

#include "polyproj/simplex_qp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace polyproj {

namespace {

using RowMatrix = PointCloud::Matrix;

RowMatrix translated(std::span<const Index> indices, const PointCloud& cloud, const Vector& w) {
  RowMatrix p(static_cast<Eigen::Index>(indices.size()), static_cast<Eigen::Index>(cloud.dim()));
  for (std::size_t r = 0; r < indices.size(); ++r) {
    p.row(static_cast<Eigen::Index>(r)) = cloud.point(indices[r]).transpose() - w.transpose();
  }
  return p;
}

bool expired(const Deadline& deadline) { return deadline && Clock::now() >= *deadline; }

IndexList to_cloud(const std::vector<Eigen::Index>& positions, std::span<const Index> indices) {
  IndexList out;
  out.reserve(positions.size());
  for (auto p : positions) out.push_back(indices[static_cast<std::size_t>(p)]);
  return out;
}

}  // namespace

std::string_view to_string(StopReason r) noexcept {
  switch (r) {
    case StopReason::tolerance: return "tolerance";
    case StopReason::iteration_cap: return "iteration_cap";
    case StopReason::timeout: return "timeout";
  }
  return "unknown";
}

void SolverStats::merge(const SolverStats& other) {
  inner_iterations += other.inner_iterations;
  if (other.terminated_by != StopReason::tolerance) terminated_by = other.terminated_by;
}

ConvexCoefficients NearestPointSolver::solve(const Vector& w, std::span<const Index> indices,
                                             const PointCloud& cloud, SolverStats* stats,
                                             Deadline deadline) const {
  if (indices.empty()) throw std::invalid_argument(std::string(name()) + ": empty index list");
  if (static_cast<std::size_t>(w.size()) != cloud.dim()) {
    throw std::invalid_argument(std::string(name()) + ": query dimension mismatch");
  }
  IndexList sorted(indices.begin(), indices.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.back() >= cloud.size()) {
    throw std::out_of_range(std::string(name()) + ": index " + std::to_string(sorted.back()) +
                            " out of range");
  }
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument(std::string(name()) + ": duplicate index");
  }

  SolverStats local;
  Vector weights = do_solve(w, indices, cloud, local, deadline);
  if (!weights.allFinite()) throw std::logic_error(std::string(name()) + ": non-finite weights");
  weights = weights.cwiseMax(0.0);
  const double s = weights.sum();
  if (!(s > 0.0)) throw std::logic_error(std::string(name()) + ": weights vanished");
  weights /= s;
  if (stats) stats->merge(local);
  return {IndexList(indices.begin(), indices.end()), std::move(weights)};
}

// Wolfe ---------------------------------------------------------------------

std::unique_ptr<NearestPointSolver> WolfeSolver::clone() const {
  return std::make_unique<WolfeSolver>(*this);
}

Vector WolfeSolver::do_solve(const Vector& w, std::span<const Index> indices,
                             const PointCloud& cloud, SolverStats& stats,
                             Deadline deadline) const {
  const RowMatrix p = translated(indices, cloud, w);
  const auto k = p.rows();
  const double eps = config().epsilon;

  Eigen::Index start = 0;
  p.rowwise().squaredNorm().minCoeff(&start);
  std::vector<Eigen::Index> set{start};
  Vector lam = Vector::Ones(1);
  Vector x = p.row(start).transpose();

  auto notify = [&] {
    if (observer_) observer_(to_cloud(set, indices), lam);
  };
  auto tick = [&] {
    if (expired(deadline)) {
      stats.terminated_by = StopReason::timeout;
      return false;
    }
    if (stats.inner_iterations >= config().max_iter) {
      stats.terminated_by = StopReason::iteration_cap;
      return false;
    }
    ++stats.inner_iterations;
    return true;
  };
  notify();

  while (tick()) {
    const Vector g = p * x;
    Eigen::Index entering = 0;
    g.minCoeff(&entering);
    const double xx = x.squaredNorm();
    if (g[entering] > xx - eps) break;
    if (std::find(set.begin(), set.end(), entering) != set.end()) break;
    set.push_back(entering);
    lam.conservativeResize(lam.size() + 1);
    lam[lam.size() - 1] = 0.0;

    bool aborted = false;
    for (;;) {
      const IndexList members = to_cloud(set, indices);
      const AffineProjection aff = project_affine_hull(members, cloud, w);
      if ((aff.beta.array() > 1e-14).all()) {
        lam = aff.beta;
        break;
      }
      if (!tick()) {
        aborted = true;
        break;
      }
      double theta = 1.0;
      Eigen::Index leaving = -1;
      for (Eigen::Index a = 0; a < aff.beta.size(); ++a) {
        if (aff.beta[a] > 1e-14) continue;
        const double denom = lam[a] - aff.beta[a];
        const double ratio = denom > 0.0 ? lam[a] / denom : 0.0;
        if (leaving < 0 || ratio < theta) {
          theta = ratio;
          leaving = a;
        }
      }
      lam = theta * aff.beta + (1.0 - theta) * lam;
      lam[leaving] = 0.0;
      std::vector<Eigen::Index> kept;
      std::vector<double> kept_lam;
      for (Eigen::Index a = 0; a < lam.size(); ++a) {
        if (lam[a] > 0.0) {
          kept.push_back(set[static_cast<std::size_t>(a)]);
          kept_lam.push_back(lam[a]);
        }
      }
      set = std::move(kept);
      lam = Eigen::Map<Vector>(kept_lam.data(), static_cast<Eigen::Index>(kept_lam.size()));
      lam /= lam.sum();
      notify();
    }

    Vector next = Vector::Zero(x.size());
    for (std::size_t a = 0; a < set.size(); ++a) {
      next += lam[static_cast<Eigen::Index>(a)] * p.row(set[a]).transpose();
    }
    const bool progressed = next.squaredNorm() < xx;
    x = std::move(next);
    if (aborted) break;
    notify();
    if (!progressed) break;
  }

  Vector weights = Vector::Zero(k);
  for (std::size_t a = 0; a < set.size(); ++a) weights[set[a]] = lam[static_cast<Eigen::Index>(a)];
  return weights;
}

// MDM -----------------------------------------------------------------------

std::unique_ptr<NearestPointSolver> MdmSolver::clone() const {
  return std::make_unique<MdmSolver>(*this);
}

Vector MdmSolver::do_solve(const Vector& w, std::span<const Index> indices,
                           const PointCloud& cloud, SolverStats& stats,
                           Deadline deadline) const {
  const RowMatrix p = translated(indices, cloud, w);
  const auto k = p.rows();
  Eigen::Index start = 0;
  p.rowwise().squaredNorm().minCoeff(&start);
  Vector alpha = Vector::Zero(k);
  alpha[start] = 1.0;
  Vector v = p.row(start).transpose();

  for (;;) {
    if (expired(deadline)) {
      stats.terminated_by = StopReason::timeout;
      break;
    }
    if (stats.inner_iterations >= config().max_iter) {
      stats.terminated_by = StopReason::iteration_cap;
      break;
    }
    const Vector g = p * v;
    Eigen::Index lo = 0;
    g.minCoeff(&lo);
    Eigen::Index hi = -1;
    for (Eigen::Index i = 0; i < k; ++i) {
      if (alpha[i] > 0.0 && (hi < 0 || g[i] > g[hi])) hi = i;
    }
    const double delta = g[hi] - g[lo];
    if (delta < config().epsilon) break;
    ++stats.inner_iterations;

    const Vector dir = (p.row(hi) - p.row(lo)).transpose();
    const double dd = dir.squaredNorm();
    double t = alpha[hi];
    if (dd > 0.0) t = std::min(t, delta / dd);
    alpha[lo] += t;
    alpha[hi] = t == alpha[hi] ? 0.0 : alpha[hi] - t;
    v -= t * dir;
    if (stats.inner_iterations % 64 == 0) v = p.transpose() * alpha;
  }
  return alpha;
}

// QP ------------------------------------------------------------------------

std::unique_ptr<NearestPointSolver> QpSolver::clone() const {
  return std::make_unique<QpSolver>(*this);
}

Vector QpSolver::do_solve(const Vector& w, std::span<const Index> indices,
                          const PointCloud& cloud, SolverStats& stats, Deadline deadline) const {
  if (indices.size() > max_points) {
    throw std::length_error("qp: " + std::to_string(indices.size()) +
                            " points exceed the dense Gram limit of " + std::to_string(max_points));
  }
  const RowMatrix p = translated(indices, cloud, w);
  const Eigen::MatrixXd gram = p * p.transpose();
  const std::vector<int> group(indices.size(), 0);
  const auto res = solve_simplex_qp(gram, group, 1, config().max_iter, deadline);
  stats.inner_iterations += res.iterations;
  if (res.timed_out) {
    stats.terminated_by = StopReason::timeout;
  } else if (!res.converged) {
    stats.terminated_by = StopReason::iteration_cap;
  }
  return res.u;
}

// Oracle --------------------------------------------------------------------

std::unique_ptr<NearestPointSolver> OracleSolver::clone() const {
  return std::make_unique<OracleSolver>(*this);
}

Vector OracleSolver::do_solve(const Vector& w, std::span<const Index> indices,
                              const PointCloud& cloud, SolverStats& stats, Deadline) const {
  const std::size_t k = indices.size();
  const std::size_t d = cloud.dim();
  if (k > max_points || d > max_dim) {
    throw std::invalid_argument("oracle: limited to " + std::to_string(max_points) +
                                " points in dimension <= " + std::to_string(max_dim));
  }
  const PointCloud sub = cloud.subset(indices);
  const double scale = squared_scale(sub, w);

  double best = std::numeric_limits<double>::infinity();
  Vector best_weights;
  const std::size_t max_support = std::min(k, d + 1);
  for (std::size_t size = 1; size <= max_support; ++size) {
    for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
      if (static_cast<std::size_t>(std::popcount(mask)) != size) continue;
      ++stats.inner_iterations;
      IndexList members;
      for (std::size_t a = 0; a < k; ++a) {
        if (mask & (1u << a)) members.push_back(a);
      }
      const AffineProjection aff = project_affine_hull(members, sub, w);
      if (aff.beta.minCoeff() < -1e-12) continue;
      const double dist = (aff.h - w).norm();
      if (dist < best - 1e-13 * std::sqrt(scale)) {
        best = dist;
        best_weights = Vector::Zero(static_cast<Eigen::Index>(k));
        for (std::size_t a = 0; a < members.size(); ++a) {
          best_weights[static_cast<Eigen::Index>(members[a])] =
              std::max(0.0, aff.beta[static_cast<Eigen::Index>(a)]);
        }
      }
    }
  }
  best_weights /= best_weights.sum();

  Vector y = sub.matrix().transpose() * best_weights;
  const auto check = check_optimality(y, w, sub, 1e-9 * scale);
  if (!check.satisfied) {
    throw std::logic_error("oracle: best candidate fails the optimality check");
  }
  return best_weights;
}

// Factory -------------------------------------------------------------------

std::unique_ptr<NearestPointSolver> make_solver(std::string_view name) {
  if (name == "wolfe") return std::make_unique<WolfeSolver>();
  if (name == "mdm") return std::make_unique<MdmSolver>();
  if (name == "qp") return std::make_unique<QpSolver>();
  if (name == "oracle") return std::make_unique<OracleSolver>();
  throw std::invalid_argument("unknown solver '" + std::string(name) + "'");
}

const std::vector<std::string>& solver_names() {
  static const std::vector<std::string> names{"wolfe", "mdm", "qp", "oracle"};
  return names;
}

}  // namespace polyproj
