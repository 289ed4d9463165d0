#include "polyproj/simplex_qp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace polyproj {

namespace {

// Equality-constrained minimiser over the free set: the bordered KKT system
// [H_FF E; E' 0][u; mu] = [0; 1]. A tiny diagonal shift is added when the
// block is singular.
Eigen::VectorXd solve_free_set(const Eigen::MatrixXd& h, const std::vector<int>& group, int groups,
                               const std::vector<Eigen::Index>& free, double shift) {
  const auto k = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + groups, k + groups);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + groups);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) kkt(a, b) = h(free[a], free[b]);
    const int g = group[static_cast<std::size_t>(free[a])];
    kkt(a, k + g) = 1.0;
    kkt(k + g, a) = 1.0;
  }
  rhs.tail(groups).setOnes();

  Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
  if (!lu.isInvertible()) {
    kkt.topLeftCorner(k, k).diagonal().array() += shift;
    lu.compute(kkt);
  }
  return lu.solve(rhs).head(k);
}

}  // namespace

SimplexQpResult solve_simplex_qp(const Eigen::MatrixXd& h, const std::vector<int>& group,
                                 int groups, std::size_t max_iter,
                                 std::optional<std::chrono::steady_clock::time_point> deadline) {
  const auto n = h.rows();
  if (h.cols() != n || static_cast<Eigen::Index>(group.size()) != n) {
    throw std::invalid_argument("solve_simplex_qp: size mismatch");
  }
  if (groups <= 0) throw std::invalid_argument("solve_simplex_qp: no groups");

  const double scale = std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
  const double shift = 1e-12 * scale;
  const double add_tol = 1e-13 * scale;

  // Start at the vertex made of each group's shortest column.
  SimplexQpResult res;
  res.u = Eigen::VectorXd::Zero(n);
  std::vector<Eigen::Index> first(static_cast<std::size_t>(groups), -1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int g = group[static_cast<std::size_t>(i)];
    if (g < 0 || g >= groups) throw std::invalid_argument("solve_simplex_qp: bad group id");
    auto& best = first[static_cast<std::size_t>(g)];
    if (best < 0 || h(i, i) < h(best, best)) best = i;
  }
  std::vector<Eigen::Index> free;
  for (auto i : first) {
    if (i < 0) throw std::invalid_argument("solve_simplex_qp: empty group");
    res.u[i] = 1.0;
    free.push_back(i);
  }
  std::sort(free.begin(), free.end());

  double last_objective = std::numeric_limits<double>::infinity();
  std::optional<Eigen::Index> just_added;
  while (res.iterations < max_iter) {
    if (deadline && std::chrono::steady_clock::now() >= *deadline) {
      res.timed_out = true;
      return res;
    }
    ++res.iterations;

    const Eigen::VectorXd target = solve_free_set(h, group, groups, free, shift);
    bool feasible = true;
    for (Eigen::Index a = 0; a < target.size(); ++a) {
      if (target[a] < 0.0) feasible = false;
    }

    if (!feasible) {
      // Step toward the free-set minimiser until a weight hits zero.
      double t = 1.0;
      for (Eigen::Index a = 0; a < target.size(); ++a) {
        const double cur = res.u[free[static_cast<std::size_t>(a)]];
        if (target[a] < 0.0) t = std::min(t, cur / (cur - target[a]));
      }
      std::vector<Eigen::Index> keep;
      for (Eigen::Index a = 0; a < target.size(); ++a) {
        const auto i = free[static_cast<std::size_t>(a)];
        res.u[i] += t * (target[a] - res.u[i]);
        const bool blocking = target[a] < 0.0 && res.u[i] <= 1e-15;
        if (blocking || res.u[i] <= 0.0) {
          res.u[i] = 0.0;
        } else {
          keep.push_back(i);
        }
      }
      // Never empty a group: the free-set system needs one variable per group.
      for (int g = 0; g < groups; ++g) {
        const bool present = std::any_of(keep.begin(), keep.end(), [&](Eigen::Index i) {
          return group[static_cast<std::size_t>(i)] == g;
        });
        if (!present) {
          Eigen::Index best = -1;
          for (auto i : free) {
            if (group[static_cast<std::size_t>(i)] == g && (best < 0 || res.u[i] > res.u[best])) best = i;
          }
          keep.push_back(best);
        }
      }
      std::sort(keep.begin(), keep.end());
      free = std::move(keep);
      just_added.reset();
      continue;
    }

    for (Eigen::Index a = 0; a < target.size(); ++a) res.u[free[static_cast<std::size_t>(a)]] = target[a];
    // Re-normalise each group so rounding never drifts off the simplex.
    for (int g = 0; g < groups; ++g) {
      double s = 0.0;
      for (auto i : free) {
        if (group[static_cast<std::size_t>(i)] == g) s += res.u[i];
      }
      for (auto i : free) {
        if (group[static_cast<std::size_t>(i)] == g) res.u[i] /= s;
      }
    }

    const Eigen::VectorXd grad = h * res.u;
    const double objective = 0.5 * res.u.dot(grad);
    if (just_added && !(objective < last_objective)) {
      // Rounding-level progress only: the added variable cannot help.
      res.converged = true;
      return res;
    }
    last_objective = objective;

    std::vector<double> level(static_cast<std::size_t>(groups), 0.0);
    std::vector<double> mass(static_cast<std::size_t>(groups), 0.0);
    for (auto i : free) {
      const auto g = static_cast<std::size_t>(group[static_cast<std::size_t>(i)]);
      level[g] += res.u[i] * grad[i];
      mass[g] += res.u[i];
    }
    for (std::size_t g = 0; g < level.size(); ++g) level[g] /= mass[g];

    Eigen::Index enter = -1;
    double most_negative = -add_tol;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (res.u[i] > 0.0) continue;
      if (std::binary_search(free.begin(), free.end(), i)) continue;
      const double reduced = grad[i] - level[static_cast<std::size_t>(group[static_cast<std::size_t>(i)])];
      if (reduced < most_negative) {
        most_negative = reduced;
        enter = i;
      }
    }
    if (enter < 0) {
      res.converged = true;
      return res;
    }
    free.insert(std::upper_bound(free.begin(), free.end(), enter), enter);
    just_added = enter;
  }
  return res;
}

}  // namespace polyproj
