#include "polyproj/accel_nearest.hpp"

#include "correction.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace polyproj {

namespace detail {

Vector settle_weights(Vector w, Eigen::Index zero_at) {
  w[zero_at] = 0.0;
  w = w.cwiseMax(0.0);
  return w / w.sum();
}

double local_scale(std::span<const Index> indices, const PointCloud& cloud) {
  double best = 1.0;
  for (std::size_t a = 0; a < indices.size(); ++a) {
    for (std::size_t b = a + 1; b < indices.size(); ++b) {
      best = std::max(best, (cloud.point(indices[a]) - cloud.point(indices[b])).norm());
    }
  }
  return best;
}

SideCorrection correct_side(std::span<const Index> indices, const Vector& alpha,
                            const PointCloud& cloud, const Vector& target, double current_dist,
                            const Tolerances& tol, std::optional<double> budget) {
  SideCorrection out;
  const AffineProjection aff = project_affine_hull(indices, cloud, target);
  if (std::abs(aff.beta.sum() - 1.0) > 1e-10) {
    out.diagnostic = "affine projection coefficients do not sum to one";
    return out;
  }
  const double aff_dist = (aff.h - target).norm();
  if (aff_dist > current_dist * (1.0 + 1e-12)) {
    out.diagnostic = "affine projection is farther than the current point";
    return out;
  }

  Eigen::Index arg = 0;
  out.coefficient_min = aff.beta.minCoeff(&arg);

  if (out.coefficient_min < -tol.eps_zero) {
    // Walk from alpha toward beta until the first weight reaches zero.
    double step = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
      if (aff.beta[i] >= 0.0) continue;
      const double s = alpha[i] / (alpha[i] - aff.beta[i]);
      if (s < step) {
        step = s;
        arg = i;
      }
    }
    out.branch = CorrectionBranch::blend;
    out.weights = settle_weights(step * aff.beta + (1.0 - step) * alpha, arg);
  } else if (out.coefficient_min <= tol.eps_zero) {
    out.branch = CorrectionBranch::adopt;
    out.weights = settle_weights(aff.beta, arg);
  } else {
    out.branch = CorrectionBranch::caratheodory;
    if (indices.size() < 2) {
      out.diagnostic = "cannot reduce a single point";
      return out;
    }
    const AffineDependence dep = affine_dependence_vector(indices, cloud, indices[0]);
    double step = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
      if (dep.gamma[i] >= 0.0) continue;
      const double s = -alpha[i] / dep.gamma[i];
      if (s < step) {
        step = s;
        arg = i;
      }
    }
    if (!std::isfinite(step)) {
      out.diagnostic = "dependence vector has no negative entry";
      return out;
    }
    if (budget && !(dep.residual * step < *budget)) {
      out.diagnostic = "points are not affinely dependent enough for a Caratheodory step";
      return out;
    }
    out.weights = settle_weights(alpha + step * dep.gamma, arg);
  }
  out.ok = true;
  return out;
}

IndexList initial_set(const IndexList& init, std::size_t d, std::size_t l) {
  IndexList out = init;
  if (out.empty()) {
    for (Index i = 0; i <= d; ++i) out.push_back(i);
  }
  std::sort(out.begin(), out.end());
  if (out.size() != d + 1) {
    throw std::invalid_argument("initial index set must have d+1 = " + std::to_string(d + 1) +
                                " entries");
  }
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
    throw std::invalid_argument("initial index set has duplicates");
  }
  if (out.back() >= l) throw std::out_of_range("initial index set: index out of range");
  return out;
}

}  // namespace detail

namespace {

OptimalityCheck criterion(const Vector& y, const Vector& z, const PointCloud& cloud, double eta,
                          bool scaled) {
  OptimalityCheck plain = check_optimality(y, z, cloud, eta);
  if (!scaled) return plain;
  const OptimalityCheck s = check_optimality_scaled(y, z, cloud, eta);
  plain.satisfied = s.satisfied;
  plain.worst_value = s.worst_value;
  return plain;
}

void validate_inputs(const Vector& z, const PointCloud& cloud, const MetaOptions& opts) {
  if (static_cast<std::size_t>(z.size()) != cloud.dim()) {
    throw std::invalid_argument("query point dimension does not match the cloud");
  }
  if (!z.allFinite()) throw std::invalid_argument("query point is not finite");
  opts.tol.validate();
}

bool expired(const Deadline& deadline) { return deadline && Clock::now() >= *deadline; }

class Run {
 public:
  Run(const Vector& z, const PointCloud& cloud, const MetaOptions& opts)
      : z_(z), cloud_(cloud), opts_(opts) {}

  void accept(const SubpolytopeState& st) {
    report.theta_trace.push_back(st.theta);
    report.visited.push_back(st.index_set);
    if (!seen_.insert(st.index_set).second) report.repeated_index_set = true;
  }

  void record(const SubpolytopeState& st, const OptimalityCheck& chk, bool step3, bool step4) {
    if (!opts_.trace) return;
    report.iterations.push_back(
        {st.outer_iter, st.index_set, st.theta, chk.worst_index, chk.worst_value, step3, step4});
  }

  SolveReport finish(const SubpolytopeState& st, Termination t, double eta, std::string diag = {}) {
    report.projection = st.trial_point;
    report.coeffs_global = st.coeffs;
    report.outer_iterations = st.outer_iter;
    report.termination = t;
    report.final_worst_value =
        criterion(st.trial_point, z_, cloud_, eta, opts_.scaled_criterion).worst_value;
    report.inner_iterations = stats.inner_iterations;
    if (!diag.empty()) report.diagnostic = std::move(diag);
    return std::move(report);
  }

  SolveReport report;
  SolverStats stats;

 private:
  const Vector& z_;
  const PointCloud& cloud_;
  const MetaOptions& opts_;
  std::set<IndexList> seen_;
};

}  // namespace

std::string_view to_string(Termination t) noexcept {
  switch (t) {
    case Termination::optimal_eta: return "optimal_eta";
    case Termination::iteration_cap: return "iteration_cap";
    case Termination::correction_failure: return "correction_failure";
    case Termination::timeout: return "timeout";
  }
  return "unknown";
}

std::string_view to_string(CorrectionBranch b) noexcept {
  switch (b) {
    case CorrectionBranch::none: return "none";
    case CorrectionBranch::blend: return "blend";
    case CorrectionBranch::adopt: return "adopt";
    case CorrectionBranch::caratheodory: return "caratheodory";
  }
  return "unknown";
}

SubpolytopeState make_state(IndexList index_set, Vector weights, const Vector& z,
                            const PointCloud& cloud, std::size_t outer_iter) {
  if (static_cast<Eigen::Index>(index_set.size()) != weights.size()) {
    throw std::invalid_argument("make_state: index set and weights differ in length");
  }
  SubpolytopeState st;
  st.coeffs = {index_set, std::move(weights)};
  st.index_set = std::move(index_set);
  st.trial_point = evaluate_point(st.coeffs, cloud);
  st.theta = (st.trial_point - z).norm();
  st.outer_iter = outer_iter;
  return st;
}

Index index_removal(std::span<const Index> indices, const PointCloud& cloud,
                    const Vector& weights, double eps_zero) {
  if (indices.empty() || static_cast<Eigen::Index>(indices.size()) != weights.size()) {
    throw std::invalid_argument("index_removal: index list and weights differ");
  }
  Eigen::Index lightest = 0;
  const double wmin = weights.minCoeff(&lightest);
  if (wmin <= eps_zero || indices.size() == 1) return indices[static_cast<std::size_t>(lightest)];

  const double scale = detail::local_scale(indices, cloud);
  const AffineDependence dep =
      affine_dependence_vector(indices, cloud, indices[0], 1e-10 * scale);
  if (!dep.dependent) return indices[static_cast<std::size_t>(lightest)];

  double step = std::numeric_limits<double>::infinity();
  Eigen::Index arg = lightest;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (dep.gamma[i] >= 0.0) continue;
    const double s = -weights[i] / dep.gamma[i];
    if (s < step) {
      step = s;
      arg = i;
    }
  }
  return indices[static_cast<std::size_t>(arg)];
}

ExchangeDecision steepest_descent_exchange(const SubpolytopeState& state, const Vector& z,
                                           const PointCloud& cloud, RemovalRule rule,
                                           double eps_zero) {
  ExchangeDecision out;
  if (rule == RemovalRule::min_weight) {
    Eigen::Index pos = 0;
    state.coeffs.weights.minCoeff(&pos);
    out.remove_index = state.index_set[static_cast<std::size_t>(pos)];
  } else {
    out.remove_index = index_removal(state.index_set, cloud, state.coeffs.weights, eps_zero);
  }
  out.insert_index = check_optimality(state.trial_point, z, cloud, 0.0).worst_index;
  out.inconsistent = std::find(state.index_set.begin(), state.index_set.end(),
                               out.insert_index) != state.index_set.end();
  return out;
}

IndexList exchanged(const IndexList& index_set, Index remove, Index insert) {
  IndexList out;
  out.reserve(index_set.size());
  for (Index i : index_set) {
    if (i != remove) out.push_back(i);
  }
  out.insert(std::upper_bound(out.begin(), out.end(), insert), insert);
  return out;
}

CorrectionOutcome correct_coefficients(SubpolytopeState& state, const Vector& z,
                                       const PointCloud& cloud, const Tolerances& tol,
                                       std::optional<double> previous_theta) {
  CorrectionOutcome out;
  std::optional<double> budget;
  if (previous_theta) budget = *previous_theta - state.theta;
  const auto side = detail::correct_side(state.index_set, state.coeffs.weights, cloud, z,
                                         state.theta, tol, budget);
  out.branch = side.branch;
  out.coefficient_min = side.coefficient_min;
  if (!side.ok) {
    out.diagnostic = side.diagnostic;
    return out;
  }

  SubpolytopeState next = make_state(state.index_set, side.weights, z, cloud, state.outer_iter);
  const double slack = 1e-12 * std::max(1.0, state.theta) +
                       tol.eps_zero * detail::local_scale(state.index_set, cloud);
  if (std::abs(next.coeffs.weights.sum() - 1.0) > tol.tau_sum) {
    out.diagnostic = "corrected weights do not sum to one";
    return out;
  }
  if (!(next.coeffs.weights.array() == 0.0).any()) {
    out.diagnostic = "correction left no zero weight";
    return out;
  }
  if (side.branch == CorrectionBranch::caratheodory) {
    if (previous_theta && !(next.theta < *previous_theta)) {
      out.diagnostic = "Caratheodory step undid the last decrease";
      return out;
    }
  } else if (next.theta > state.theta + slack) {
    out.diagnostic = "correction increased theta";
    return out;
  }
  next.correction_attempted = true;
  state = std::move(next);
  out.ok = true;
  return out;
}

bool decay_audit(std::span<const double> thetas) {
  for (std::size_t i = 1; i < thetas.size(); ++i) {
    if (!(thetas[i] < thetas[i - 1])) return false;
  }
  return true;
}

SolveReport solve_directly(const Vector& z, const PointCloud& cloud,
                           const NearestPointSolver& solver, const MetaOptions& opts) {
  validate_inputs(z, cloud, opts);
  IndexList all(cloud.size());
  for (Index i = 0; i < all.size(); ++i) all[i] = i;
  Run run(z, cloud, opts);
  const ConvexCoefficients c = solver.solve(z, all, cloud, &run.stats, opts.deadline);
  SubpolytopeState st = make_state(all, c.weights, z, cloud);
  run.accept(st);
  const auto chk = criterion(st.trial_point, z, cloud, opts.tol.eta, opts.scaled_criterion);
  run.record(st, chk, false, false);
  Termination t = Termination::optimal_eta;
  if (run.stats.terminated_by == StopReason::timeout) {
    t = Termination::timeout;
  } else if (!chk.satisfied) {
    t = Termination::iteration_cap;
  }
  return run.finish(st, t, opts.tol.eta);
}

SolveReport meta_project_ideal(const Vector& z, const PointCloud& cloud,
                               const NearestPointSolver& solver, const MetaOptions& opts) {
  validate_inputs(z, cloud, opts);
  const std::size_t d = cloud.dim();
  if (cloud.size() < d + 1) return solve_directly(z, cloud, solver, opts);

  // An inner accuracy a on the subproblem moves y by up to sqrt(a), which
  // shifts the full-cloud gap by about sqrt(a * scale).
  const double scale = squared_scale(cloud, z);
  const double slack = std::max({1e-12 * scale, 10.0 * solver.accuracy(),
                                 std::sqrt(solver.accuracy() * scale)});
  Run run(z, cloud, opts);
  IndexList set = detail::initial_set(opts.init, d, cloud.size());
  for (std::size_t n = 0;; ++n) {
    const ConvexCoefficients c = solver.solve(z, set, cloud, &run.stats, opts.deadline);
    SubpolytopeState st = make_state(set, c.weights, z, cloud, n);
    run.accept(st);
    if (run.stats.terminated_by == StopReason::timeout || expired(opts.deadline)) {
      return run.finish(st, Termination::timeout, slack);
    }
    const auto chk = criterion(st.trial_point, z, cloud, slack, opts.scaled_criterion);
    run.record(st, chk, false, false);
    if (chk.satisfied) return run.finish(st, Termination::optimal_eta, slack);
    if (n >= opts.tol.max_outer) return run.finish(st, Termination::iteration_cap, slack);

    const auto dec = steepest_descent_exchange(st, z, cloud, RemovalRule::index_removal,
                                               opts.tol.eps_zero);
    if (dec.inconsistent) {
      return run.finish(st, Termination::correction_failure, slack,
                        "entering index " + std::to_string(dec.insert_index) +
                            " is already in the subpolytope; inner accuracy too low");
    }
    set = exchanged(st.index_set, dec.remove_index, dec.insert_index);
  }
}

SolveReport meta_project_robust(const Vector& z, const PointCloud& cloud,
                                const NearestPointSolver& solver, const MetaOptions& opts) {
  validate_inputs(z, cloud, opts);
  const std::size_t d = cloud.dim();
  if (cloud.size() < d + 1) return solve_directly(z, cloud, solver, opts);

  const double eta = opts.tol.eta;
  Run run(z, cloud, opts);
  auto solve_on = [&](const IndexList& set, std::size_t n) {
    return make_state(set, solver.solve(z, set, cloud, &run.stats, opts.deadline).weights, z,
                      cloud, n);
  };
  auto timed_out = [&] {
    return run.stats.terminated_by == StopReason::timeout || expired(opts.deadline);
  };

  SubpolytopeState st = solve_on(detail::initial_set(opts.init, d, cloud.size()), 0);
  run.accept(st);
  std::optional<double> previous_theta;
  bool step3 = false;
  bool step4 = false;

  for (;;) {
    if (timed_out()) return run.finish(st, Termination::timeout, eta);
    // Step 1: stopping test, then the exchange.
    const auto chk = criterion(st.trial_point, z, cloud, eta, opts.scaled_criterion);
    run.record(st, chk, step3, step4);
    step3 = step4 = false;
    if (chk.satisfied) return run.finish(st, Termination::optimal_eta, eta);
    if (st.outer_iter >= opts.tol.max_outer) return run.finish(st, Termination::iteration_cap, eta);

    const auto dec = steepest_descent_exchange(st, z, cloud, RemovalRule::min_weight,
                                               opts.tol.eps_zero);
    if (dec.inconsistent) {
      return run.finish(st, Termination::correction_failure, eta,
                        "entering index " + std::to_string(dec.insert_index) +
                            " is already in the subpolytope; eta is too small for the inner "
                            "solver accuracy");
    }

    // Step 2: accept on strict decrease.
    SubpolytopeState next =
        solve_on(exchanged(st.index_set, dec.remove_index, dec.insert_index), st.outer_iter + 1);
    if (timed_out()) return run.finish(st, Termination::timeout, eta);
    if (next.theta < st.theta) {
      previous_theta = st.theta;
      st = std::move(next);
      run.accept(st);
      continue;
    }

    // Steps 3-4: at most one correction per iteration.
    if (st.correction_attempted) {
      return run.finish(st, Termination::correction_failure, eta,
                        "no decrease after a correction in iteration " +
                            std::to_string(st.outer_iter));
    }
    const auto fix = correct_coefficients(st, z, cloud, opts.tol, previous_theta);
    if (!fix.ok) {
      st.correction_attempted = true;
      return run.finish(st, Termination::correction_failure, eta,
                        std::string(to_string(fix.branch)) + " correction failed: " +
                            fix.diagnostic);
    }
    if (fix.branch == CorrectionBranch::caratheodory) {
      ++run.report.corrections_step4;
      step4 = true;
    } else {
      ++run.report.corrections_step3;
      step3 = true;
    }
    run.report.theta_trace.back() = st.theta;
  }
}

SolveReport project(const Vector& z, const PointCloud& cloud, const ProjectOptions& opts) {
  auto solver = make_solver(opts.solver);
  if (opts.inner_epsilon) solver->config().epsilon = *opts.inner_epsilon;
  if (opts.inner_max_iter) solver->config().max_iter = *opts.inner_max_iter;
  MetaOptions meta;
  meta.tol.eta = opts.eta.value_or(default_eta(cloud.dim()));
  meta.tol.max_outer = opts.max_outer;
  meta.init = opts.init;
  meta.trace = opts.trace;
  meta.scaled_criterion = opts.scaled_criterion;
  meta.deadline = opts.deadline;
  if (!opts.accelerated) return solve_directly(z, cloud, *solver, meta);
  if (opts.ideal) return meta_project_ideal(z, cloud, *solver, meta);
  return meta_project_robust(z, cloud, *solver, meta);
}

}  // namespace polyproj
