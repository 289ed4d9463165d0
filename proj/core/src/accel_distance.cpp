#include "polyproj/accel_distance.hpp"

#include "correction.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace polyproj {

namespace {

IndexList all_indices(std::size_t n) {
  IndexList out(n);
  for (Index i = 0; i < n; ++i) out[i] = i;
  return out;
}

void validate_pair(const PointCloud& cloud_p, const PointCloud& cloud_q,
                   const DistanceMetaOptions& opts) {
  if (cloud_p.dim() != cloud_q.dim()) {
    throw std::invalid_argument("clouds differ in dimension");
  }
  opts.tol.validate();
}

double pair_scale(const PointCloud& cloud_p, const PointCloud& cloud_q) {
  return std::max(squared_scale(cloud_p, cloud_q.point(0)), squared_scale(cloud_q, cloud_p.point(0)));
}

bool expired(const Deadline& deadline) { return deadline && Clock::now() >= *deadline; }

Index lightest(const PairState& st, bool p_side) {
  const auto& c = p_side ? st.coeffs_p : st.coeffs_q;
  Eigen::Index pos = 0;
  c.weights.minCoeff(&pos);
  return c.support[static_cast<std::size_t>(pos)];
}

bool contains(const IndexList& set, Index i) {
  return std::binary_search(set.begin(), set.end(), i);
}

class PairRun {
 public:
  PairRun(const PointCloud& cloud_p, const PointCloud& cloud_q, const DistanceMetaOptions& opts)
      : p_(cloud_p), q_(cloud_q), opts_(opts) {}

  void accept(const PairState& st) {
    report.theta_trace.push_back(st.theta);
    auto key = std::make_pair(st.index_set_p, st.index_set_q);
    if (!seen_.insert(key).second) report.repeated_index_pair = true;
    report.visited.push_back(std::move(key));
  }

  void record(const PairState& st, CorrectionBranch bp, CorrectionBranch bq) {
    if (!opts_.trace) return;
    report.iterations.push_back({st.outer_iter, st.index_set_p, st.index_set_q, st.theta,
                                 st.rho_x, st.rho_y, bp, bq});
  }

  PairReport finish(const PairState& st, Termination t, double eta, std::string diag = {}) {
    const auto pc = check_pair_optimality(st.v, st.w, p_, q_, eta);
    report.v = st.v;
    report.w = st.w;
    report.distance = st.theta;
    report.coeffs_p = st.coeffs_p;
    report.coeffs_q = st.coeffs_q;
    report.outer_iterations = st.outer_iter;
    report.termination = t;
    report.rho_x = pc.rho_x;
    report.rho_y = pc.rho_y;
    report.inner_iterations = stats.inner_iterations;
    if (!diag.empty()) report.diagnostic = std::move(diag);
    return std::move(report);
  }

  PairReport report;
  SolverStats stats;

 private:
  const PointCloud& p_;
  const PointCloud& q_;
  const DistanceMetaOptions& opts_;
  std::set<std::pair<IndexList, IndexList>> seen_;
};

struct Sides {
  bool fixed_p;
  bool fixed_q;
  IndexList init_p;
  IndexList init_q;
};

Sides choose_sides(const PointCloud& cloud_p, const PointCloud& cloud_q,
                   const DistanceMetaOptions& opts) {
  const std::size_t d = cloud_p.dim();
  Sides s;
  s.fixed_p = cloud_p.size() <= d + 1;
  s.fixed_q = cloud_q.size() <= d + 1;
  s.init_p = s.fixed_p ? all_indices(cloud_p.size())
                       : detail::initial_set(opts.init_p, d, cloud_p.size());
  s.init_q = s.fixed_q ? all_indices(cloud_q.size())
                       : detail::initial_set(opts.init_q, d, cloud_q.size());
  return s;
}

}  // namespace

PairState make_pair_state(IndexList index_set_p, Vector weights_p, IndexList index_set_q,
                          Vector weights_q, const PointCloud& cloud_p, const PointCloud& cloud_q,
                          std::size_t outer_iter) {
  if (static_cast<Eigen::Index>(index_set_p.size()) != weights_p.size() ||
      static_cast<Eigen::Index>(index_set_q.size()) != weights_q.size()) {
    throw std::invalid_argument("make_pair_state: index sets and weights differ in length");
  }
  PairState st;
  st.coeffs_p = {index_set_p, std::move(weights_p)};
  st.coeffs_q = {index_set_q, std::move(weights_q)};
  st.index_set_p = std::move(index_set_p);
  st.index_set_q = std::move(index_set_q);
  st.v = evaluate_point(st.coeffs_p, cloud_p);
  st.w = evaluate_point(st.coeffs_q, cloud_q);
  st.theta = (st.v - st.w).norm();
  st.outer_iter = outer_iter;
  return st;
}

PairRemoval pair_index_removal(const PairState& state, const PointCloud& cloud_p,
                               const PointCloud& cloud_q, bool remove_p, bool remove_q,
                               double eps_zero) {
  PairRemoval out;
  if (remove_p) out.p = index_removal(state.index_set_p, cloud_p, state.coeffs_p.weights, eps_zero);
  if (remove_q) out.q = index_removal(state.index_set_q, cloud_q, state.coeffs_q.weights, eps_zero);
  return out;
}

PairCorrectionOutcome coefficients_correction(PairState& state, const PointCloud& cloud_p,
                                              const PointCloud& cloud_q, const Tolerances& tol,
                                              std::optional<double> previous_theta,
                                              bool fixed_p, bool fixed_q) {
  PairCorrectionOutcome out;
  // Each side may spend half of the last decrease on a Caratheodory step.
  std::optional<double> budget;
  if (previous_theta) budget = 0.5 * (*previous_theta - state.theta);

  Vector alpha = state.coeffs_p.weights;
  Vector beta = state.coeffs_q.weights;
  Vector v = state.v;
  Vector w = state.w;
  bool any_caratheodory = false;

  if (!fixed_p && state.index_set_p.size() > 1 && state.rho_x < -tol.eta) {
    const auto side = detail::correct_side(state.index_set_p, alpha, cloud_p, w, (v - w).norm(),
                                           tol, budget);
    out.branch_p = side.branch;
    if (!side.ok) {
      out.diagnostic = "P side: " + side.diagnostic;
      return out;
    }
    alpha = side.weights;
    v = evaluate_point({state.index_set_p, alpha}, cloud_p);
    any_caratheodory |= side.branch == CorrectionBranch::caratheodory;
  }
  if (!fixed_q && state.index_set_q.size() > 1) {
    const auto side = detail::correct_side(state.index_set_q, beta, cloud_q, v, (w - v).norm(),
                                           tol, budget);
    out.branch_q = side.branch;
    if (!side.ok) {
      out.diagnostic = "Q side: " + side.diagnostic;
      return out;
    }
    beta = side.weights;
    w = evaluate_point({state.index_set_q, beta}, cloud_q);
    any_caratheodory |= side.branch == CorrectionBranch::caratheodory;
  }

  PairState next = make_pair_state(state.index_set_p, alpha, state.index_set_q, beta, cloud_p,
                                   cloud_q, state.outer_iter);
  for (const Vector* weights : {&next.coeffs_p.weights, &next.coeffs_q.weights}) {
    if (std::abs(weights->sum() - 1.0) > tol.tau_sum) {
      out.diagnostic = "corrected weights do not sum to one";
      return out;
    }
  }
  if (out.branch_p != CorrectionBranch::none && !(next.coeffs_p.weights.array() == 0.0).any()) {
    out.diagnostic = "P side kept no zero weight";
    return out;
  }
  if (out.branch_q != CorrectionBranch::none && !(next.coeffs_q.weights.array() == 0.0).any()) {
    out.diagnostic = "Q side kept no zero weight";
    return out;
  }
  const double slack =
      1e-12 * std::max(1.0, state.theta) +
      tol.eps_zero * std::max(detail::local_scale(state.index_set_p, cloud_p),
                              detail::local_scale(state.index_set_q, cloud_q));
  if (any_caratheodory) {
    if (previous_theta && !(next.theta < *previous_theta)) {
      out.diagnostic = "Caratheodory step undid the last decrease";
      return out;
    }
  } else if (next.theta > state.theta + slack) {
    out.diagnostic = "correction increased theta";
    return out;
  }
  next.rho_x = state.rho_x;
  next.rho_y = state.rho_y;
  next.correction_attempted = true;
  state = std::move(next);
  out.ok = true;
  return out;
}

PairReport solve_pair_directly(const PointCloud& cloud_p, const PointCloud& cloud_q,
                               const DistanceSolver& solver, const DistanceMetaOptions& opts) {
  validate_pair(cloud_p, cloud_q, opts);
  PairRun run(cloud_p, cloud_q, opts);
  const IndexList all_p = all_indices(cloud_p.size());
  const IndexList all_q = all_indices(cloud_q.size());
  const auto c = solver.solve_pair(all_p, cloud_p, all_q, cloud_q, &run.stats, opts.deadline);
  PairState st = make_pair_state(all_p, c.p.weights, all_q, c.q.weights, cloud_p, cloud_q);
  const auto pc = check_pair_optimality(st.v, st.w, cloud_p, cloud_q, opts.tol.eta);
  st.rho_x = pc.rho_x;
  st.rho_y = pc.rho_y;
  run.accept(st);
  run.record(st, CorrectionBranch::none, CorrectionBranch::none);
  Termination t = Termination::optimal_eta;
  if (run.stats.terminated_by == StopReason::timeout) {
    t = Termination::timeout;
  } else if (!pc.satisfied) {
    t = Termination::iteration_cap;
  }
  return run.finish(st, t, opts.tol.eta);
}

PairReport meta_distance_ideal(const PointCloud& cloud_p, const PointCloud& cloud_q,
                               const DistanceSolver& solver, const DistanceMetaOptions& opts) {
  validate_pair(cloud_p, cloud_q, opts);
  const Sides sides = choose_sides(cloud_p, cloud_q, opts);
  if (sides.fixed_p && sides.fixed_q) return solve_pair_directly(cloud_p, cloud_q, solver, opts);

  const double scale = pair_scale(cloud_p, cloud_q);
  const double slack = std::max({1e-12 * scale, 10.0 * solver.accuracy(),
                                 std::sqrt(solver.accuracy() * scale)});
  PairRun run(cloud_p, cloud_q, opts);
  IndexList set_p = sides.init_p;
  IndexList set_q = sides.init_q;
  for (std::size_t n = 0;; ++n) {
    const auto c = solver.solve_pair(set_p, cloud_p, set_q, cloud_q, &run.stats, opts.deadline);
    PairState st = make_pair_state(set_p, c.p.weights, set_q, c.q.weights, cloud_p, cloud_q, n);
    const auto pc = check_pair_optimality(st.v, st.w, cloud_p, cloud_q, slack);
    st.rho_x = pc.rho_x;
    st.rho_y = pc.rho_y;
    run.accept(st);
    if (run.stats.terminated_by == StopReason::timeout || expired(opts.deadline)) {
      return run.finish(st, Termination::timeout, slack);
    }
    run.record(st, CorrectionBranch::none, CorrectionBranch::none);
    if (pc.satisfied) return run.finish(st, Termination::optimal_eta, slack);
    if (n >= opts.tol.max_outer) return run.finish(st, Termination::iteration_cap, slack);

    const bool act_p = !sides.fixed_p && pc.rho_x < -slack;
    const bool act_q = !sides.fixed_q && pc.rho_y < -slack;
    if (!act_p && !act_q) {
      return run.finish(st, Termination::correction_failure, slack,
                        "a whole-cloud side fails the test; inner accuracy too low");
    }
    const auto removal = pair_index_removal(st, cloud_p, cloud_q, act_p, act_q, opts.tol.eps_zero);
    if (act_p) {
      if (contains(set_p, pc.worst_x)) {
        return run.finish(st, Termination::correction_failure, slack,
                          "entering P index already in the subpolytope");
      }
      set_p = exchanged(set_p, *removal.p, pc.worst_x);
    }
    if (act_q) {
      if (contains(set_q, pc.worst_y)) {
        return run.finish(st, Termination::correction_failure, slack,
                          "entering Q index already in the subpolytope");
      }
      set_q = exchanged(set_q, *removal.q, pc.worst_y);
    }
  }
}

PairReport meta_distance_robust(const PointCloud& cloud_p, const PointCloud& cloud_q,
                                const DistanceSolver& solver, const DistanceMetaOptions& opts) {
  validate_pair(cloud_p, cloud_q, opts);
  const Sides sides = choose_sides(cloud_p, cloud_q, opts);
  if (sides.fixed_p && sides.fixed_q) return solve_pair_directly(cloud_p, cloud_q, solver, opts);

  const double eta = opts.tol.eta;
  PairRun run(cloud_p, cloud_q, opts);
  auto solve_on = [&](const IndexList& set_p, const IndexList& set_q, std::size_t n) {
    const auto c = solver.solve_pair(set_p, cloud_p, set_q, cloud_q, &run.stats, opts.deadline);
    return make_pair_state(set_p, c.p.weights, set_q, c.q.weights, cloud_p, cloud_q, n);
  };
  auto timed_out = [&] {
    return run.stats.terminated_by == StopReason::timeout || expired(opts.deadline);
  };

  PairState st = solve_on(sides.init_p, sides.init_q, 0);
  run.accept(st);
  std::optional<double> previous_theta;
  CorrectionBranch last_p = CorrectionBranch::none;
  CorrectionBranch last_q = CorrectionBranch::none;

  for (;;) {
    if (timed_out()) return run.finish(st, Termination::timeout, eta);
    const auto pc = check_pair_optimality(st.v, st.w, cloud_p, cloud_q, eta);
    st.rho_x = pc.rho_x;
    st.rho_y = pc.rho_y;
    run.record(st, last_p, last_q);
    last_p = last_q = CorrectionBranch::none;
    if (pc.satisfied) return run.finish(st, Termination::optimal_eta, eta);
    if (st.outer_iter >= opts.tol.max_outer) return run.finish(st, Termination::iteration_cap, eta);

    const bool act_p = !sides.fixed_p && pc.rho_x < -eta;
    const bool act_q = !sides.fixed_q && pc.rho_y < -eta;
    if (!act_p && !act_q) {
      return run.finish(st, Termination::correction_failure, eta,
                        "a whole-cloud side fails the test; inner accuracy too low");
    }
    IndexList set_p = st.index_set_p;
    IndexList set_q = st.index_set_q;
    if (act_p) {
      if (contains(set_p, pc.worst_x)) {
        return run.finish(st, Termination::correction_failure, eta,
                          "entering P index already in the subpolytope; eta too small");
      }
      set_p = exchanged(set_p, lightest(st, true), pc.worst_x);
    }
    if (act_q) {
      if (contains(set_q, pc.worst_y)) {
        return run.finish(st, Termination::correction_failure, eta,
                          "entering Q index already in the subpolytope; eta too small");
      }
      set_q = exchanged(set_q, lightest(st, false), pc.worst_y);
    }

    PairState next = solve_on(set_p, set_q, st.outer_iter + 1);
    if (timed_out()) return run.finish(st, Termination::timeout, eta);
    if (next.theta < st.theta) {
      previous_theta = st.theta;
      st = std::move(next);
      run.accept(st);
      continue;
    }

    if (st.correction_attempted) {
      return run.finish(st, Termination::correction_failure, eta,
                        "no decrease after a correction in iteration " +
                            std::to_string(st.outer_iter));
    }
    const auto fix = coefficients_correction(st, cloud_p, cloud_q, opts.tol, previous_theta,
                                             sides.fixed_p, sides.fixed_q);
    if (!fix.ok) {
      return run.finish(st, Termination::correction_failure, eta,
                        "coefficients correction failed: " + fix.diagnostic);
    }
    ++run.report.corrections;
    last_p = fix.branch_p;
    last_q = fix.branch_q;
    run.report.theta_trace.back() = st.theta;
  }
}

PairReport distance(const PointCloud& cloud_p, const PointCloud& cloud_q,
                    const DistanceOptions& opts) {
  const bool joint_qp = opts.solver == "pairqp" || (!opts.accelerated && opts.solver == "qp");
  std::unique_ptr<DistanceSolver> solver =
      joint_qp ? std::make_unique<PairQpSolver>() : make_distance_solver(opts.solver);
  if (auto* red = dynamic_cast<ReductionDistanceSolver*>(solver.get())) {
    if (opts.inner_epsilon) red->inner().config().epsilon = *opts.inner_epsilon;
    if (opts.inner_max_iter) red->inner().config().max_iter = *opts.inner_max_iter;
  }
  DistanceMetaOptions meta;
  meta.tol.eta = opts.eta;
  meta.tol.max_outer = opts.max_outer;
  meta.init_p = opts.init_p;
  meta.init_q = opts.init_q;
  meta.trace = opts.trace;
  meta.deadline = opts.deadline;
  if (!opts.accelerated) return solve_pair_directly(cloud_p, cloud_q, *solver, meta);
  if (opts.ideal) return meta_distance_ideal(cloud_p, cloud_q, *solver, meta);
  return meta_distance_robust(cloud_p, cloud_q, *solver, meta);
}

}  // namespace polyproj
