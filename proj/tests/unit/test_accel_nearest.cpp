#include "polyproj/accel_nearest.hpp"

#include "helpers.hpp"
#include "oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <set>
#include <string>

using namespace polyproj;

namespace {

const PointCloud kFourPoints{{0, 4}, {0, 2}, {2, 2}, {-2, 1}};
const PointCloud kRemark{{2, 2}, {3, 1}, {1, 1}, {-1, 1}};

Vector v2(double a, double b) { return Vector(Eigen::Vector2d(a, b)); }

void check_post(const SubpolytopeState& st, double theta_before) {
  CHECK(st.coeffs.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((st.coeffs.weights.array() == 0.0).any());
  CHECK((st.coeffs.weights.array() >= 0.0).all());
  CHECK(st.theta <= theta_before * (1 + 1e-12));
  CHECK(st.correction_attempted);
}

}  // namespace

TEST_SUITE("accel_nearest") {

TEST_CASE("make_state and exchanged") {
  const auto st = make_state({1, 2, 3}, Eigen::Vector3d(0, 0.5, 0.5), Vector::Zero(2), kFourPoints);
  CHECK(st.trial_point.isApprox(v2(0, 1.5)));
  CHECK(st.theta == doctest::Approx(1.5));
  CHECK_THROWS_AS(make_state({1, 2}, Eigen::Vector3d(0, 0.5, 0.5), Vector::Zero(2), kFourPoints),
                  std::invalid_argument);

  CHECK(exchanged({0, 1, 2}, 0, 3) == IndexList{1, 2, 3});
  CHECK(exchanged({2, 5, 9}, 9, 0) == IndexList{0, 2, 5});
  CHECK(exchanged({2, 5, 9}, 5, 7) == IndexList{2, 7, 9});
}

TEST_CASE("exchange on the remark instance") {
  const auto st = make_state({0, 1, 2}, Eigen::Vector3d(0, 0, 1), Vector::Zero(2), kRemark);
  const auto dec = steepest_descent_exchange(st, Vector::Zero(2), kRemark);
  CHECK(dec.remove_index == 0);
  CHECK(dec.insert_index == 3);
  CHECK_FALSE(dec.inconsistent);
  const IndexList next = exchanged(st.index_set, dec.remove_index, dec.insert_index);
  CHECK(next == IndexList{1, 2, 3});
  CHECK(affine_dependence_vector(next, kRemark, 1).residual <= 1e-10);
}

TEST_CASE("exchange flags an entering index already present") {
  const auto st = make_state({0, 2, 3}, Eigen::Vector3d(0.2, 0.4, 0.4), Vector::Zero(2), kFourPoints);
  const auto dec = steepest_descent_exchange(st, Vector::Zero(2), kFourPoints);
  // y = (0.4, 2.0); <y, x_i> is smallest at x_3 = (-2, 1), which is already in the set.
  CHECK(dec.insert_index == 3);
  CHECK(dec.inconsistent);
}

TEST_CASE("index removal") {
  // A zero weight is removed first.
  CHECK(index_removal(IndexList{0, 1, 2}, kRemark, Eigen::Vector3d(0.5, 0, 0.5)) == 1);
  // Collinear support with positive weights: the Caratheodory step zeroes an end point
  // and y stays in the hull of the rest.
  const IndexList line{1, 2, 3};
  const Eigen::Vector3d w(0.25, 0.5, 0.25);
  const Index k = index_removal(line, kRemark, w);
  CHECK((k == 1 || k == 3));
  const Vector y = evaluate_point({line, w}, kRemark);
  IndexList rest;
  for (Index i : line) {
    if (i != k) rest.push_back(i);
  }
  const auto ref = testoracle::nearest(testhelp::rows(kRemark.subset(rest)), y);
  CHECK(ref.dist < 1e-12);
  // Affinely independent support: falls back to the smallest weight.
  CHECK(index_removal(IndexList{0, 2, 3}, kFourPoints, Eigen::Vector3d(0.5, 0.2, 0.3)) == 2);
}

TEST_CASE("correction blends toward the affine projection") {
  const PointCloud tri{{1, 1}, {2, 1}, {1, 2}};
  auto st = make_state({0, 1, 2}, Vector::Constant(3, 1.0 / 3), Vector::Zero(2), tri);
  const double before = st.theta;
  const auto out = correct_coefficients(st, Vector::Zero(2), tri, Tolerances{}, std::nullopt);
  REQUIRE(out.ok);
  CHECK(out.branch == CorrectionBranch::blend);
  CHECK(out.coefficient_min == doctest::Approx(-1.0));
  check_post(st, before);
  CHECK(st.coeffs.weights[0] == doctest::Approx(1.0));
  CHECK(st.theta == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("correction adopts an affine projection on the boundary") {
  const PointCloud tri{{1, 0}, {0, 1}, {1, 1}};
  const Vector z = v2(0.5, 0.5);
  auto st = make_state({0, 1, 2}, Vector::Constant(3, 1.0 / 3), z, tri);
  const double before = st.theta;
  const auto out = correct_coefficients(st, z, tri, Tolerances{}, std::nullopt);
  REQUIRE(out.ok);
  CHECK(out.branch == CorrectionBranch::adopt);
  check_post(st, before);
  CHECK(st.coeffs.weights[2] == 0.0);
  CHECK(st.theta < 1e-12);
}

TEST_CASE("correction performs a Caratheodory reduction") {
  const PointCloud line{{-1, 1}, {0, 1}, {1, 1}};
  auto st = make_state({0, 1, 2}, Eigen::Vector3d(0.25, 0.5, 0.25), Vector::Zero(2), line);
  const double before = st.theta;
  const auto out = correct_coefficients(st, Vector::Zero(2), line, Tolerances{}, 2.0);
  REQUIRE(out.ok);
  CHECK(out.branch == CorrectionBranch::caratheodory);
  CHECK(out.coefficient_min > 0.0);
  check_post(st, before);
  CHECK(st.theta < 2.0);
  CHECK(st.trial_point.isApprox(v2(0, 1)));
}

TEST_CASE("a failed correction leaves the state alone") {
  const PointCloud line{{-1, 1}, {0, 1}, {1, 1}};
  auto st = make_state({0, 1, 2}, Eigen::Vector3d(0.25, 0.5, 0.25), Vector::Zero(2), line);
  const auto copy = st;
  // No room below the previous theta.
  const auto out = correct_coefficients(st, Vector::Zero(2), line, Tolerances{}, st.theta);
  CHECK_FALSE(out.ok);
  CHECK(out.branch == CorrectionBranch::caratheodory);
  CHECK_FALSE(out.diagnostic.empty());
  CHECK(st.coeffs.weights == copy.coeffs.weights);
  CHECK_FALSE(st.correction_attempted);

  // Affinely independent points: the reduction moves y, so it must stay
  // below the previous theta.
  const PointCloud tri{{-1, -1}, {1, -1}, {0, 1}};
  auto s2 = make_state({0, 1, 2}, Eigen::Vector3d(0.2, 0.3, 0.5), Vector::Zero(2), tri);
  const auto o2 = correct_coefficients(s2, Vector::Zero(2), tri, Tolerances{}, 5.0);
  CHECK(o2.branch == CorrectionBranch::caratheodory);
  if (o2.ok) CHECK(s2.theta < 5.0);
  auto s3 = make_state({0, 1, 2}, Eigen::Vector3d(0.2, 0.3, 0.5), Vector::Zero(2), tri);
  CHECK_FALSE(correct_coefficients(s3, Vector::Zero(2), tri, Tolerances{}, s3.theta + 1e-3).ok);
}

TEST_CASE("decay audit") {
  const std::vector<double> good{3, 2, 1};
  const std::vector<double> flat{3, 2, 2};
  CHECK(decay_audit(good));
  CHECK_FALSE(decay_audit(flat));
  CHECK(decay_audit(std::vector<double>{}));
}

TEST_CASE("worked example through project") {
  for (const auto& n : solver_names()) {
    for (bool ideal : {false, true}) {
      CAPTURE(n);
      CAPTURE(ideal);
      ProjectOptions o;
      o.solver = n;
      o.ideal = ideal;
      o.trace = true;
      const auto r = project(Vector::Zero(2), kFourPoints, o);
      CHECK(r.termination == Termination::optimal_eta);
      CHECK(r.outer_iterations == 1);
      CHECK(r.projection[0] == doctest::Approx(-6.0 / 17).epsilon(1e-7));
      CHECK(r.projection[1] == doctest::Approx(24.0 / 17).epsilon(1e-7));
      CHECK(r.coeffs_global.weight_of(2) == doctest::Approx(7.0 / 17).epsilon(1e-5));
      CHECK(r.coeffs_global.weight_of(3) == doctest::Approx(10.0 / 17).epsilon(1e-5));
      REQUIRE(r.iterations.size() == 2);
      CHECK(r.iterations[0].index_set == IndexList{0, 1, 2});
      CHECK(r.iterations[0].worst_index == 3);
      CHECK(r.iterations[1].index_set == IndexList{1, 2, 3});
      CHECK(r.theta_trace.size() == 2);
      CHECK(decay_audit(r.theta_trace));
      CHECK_FALSE(r.repeated_index_set);
    }
  }
}

TEST_CASE("project validates its inputs") {
  ProjectOptions o;
  CHECK_THROWS_AS(project(Vector::Zero(3), kFourPoints, o), std::invalid_argument);
  o.init = {0, 1};
  CHECK_THROWS_AS(project(Vector::Zero(2), kFourPoints, o), std::invalid_argument);
  o.init = {0, 1, 9};
  CHECK_THROWS_AS(project(Vector::Zero(2), kFourPoints, o), std::out_of_range);
  o.init = {};
  o.solver = "bogus";
  CHECK_THROWS_AS(project(Vector::Zero(2), kFourPoints, o), std::invalid_argument);
  o.solver = "qp";
  o.eta = -1.0;
  CHECK_THROWS_AS(project(Vector::Zero(2), kFourPoints, o), std::invalid_argument);
}

TEST_CASE("fewer than d+1 points falls back to one direct solve") {
  const PointCloud two{{1, 0, 0}, {0, 1, 0}};
  const auto r = project(Vector::Zero(3), two, ProjectOptions{});
  CHECK(r.termination == Termination::optimal_eta);
  CHECK(r.projection.isApprox(Eigen::Vector3d(0.5, 0.5, 0)));
}

TEST_CASE("iteration cap and deadline") {
  SplitMix64 rng(21);
  const PointCloud cloud = testhelp::random_cloud(rng, 3, 400, 1.5);
  ProjectOptions o;
  o.max_outer = 1;
  const auto capped = project(Vector::Zero(3), cloud, o);
  CHECK(capped.termination == Termination::iteration_cap);
  CHECK(capped.outer_iterations <= 1);

  ProjectOptions t;
  t.deadline = Clock::now() - std::chrono::seconds(1);
  CHECK(project(Vector::Zero(3), cloud, t).termination == Termination::timeout);
}

TEST_CASE("random instances match the oracle with both variants") {
  SplitMix64 rng(606);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t d = 2 + trial % 2;
    const std::size_t l = 5 + trial % 8;
    const PointCloud cloud = testhelp::random_cloud(rng, d, l, 1.0);
    const Vector z = testhelp::random_point(rng, d, 0.5);
    const auto ref = testoracle::nearest(testhelp::rows(cloud), z);
    for (const std::string n : {"qp", "wolfe", "mdm"}) {
      for (bool ideal : {false, true}) {
        CAPTURE(trial);
        CAPTURE(n);
        CAPTURE(ideal);
        ProjectOptions o;
        o.solver = n;
        o.ideal = ideal;
        const auto r = project(z, cloud, o);
        CHECK(r.termination == Termination::optimal_eta);
        CHECK((r.projection - ref.point).norm() <= std::max(1e-6, std::sqrt(1e-4)));
        CHECK(decay_audit(r.theta_trace));
        CHECK_FALSE(r.repeated_index_set);
        std::set<IndexList> distinct(r.visited.begin(), r.visited.end());
        CHECK(distinct.size() == r.visited.size());
        CHECK(r.coeffs_global.is_valid(1e-12));
      }
    }
  }
}

TEST_CASE("wolfe never corrects on compressed cubes") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto inst = gen_compressed_cube(4, 300, seed);
    ProjectOptions o;
    o.solver = "wolfe";
    const auto r = project(inst.z, inst.cloud_p, o);
    CHECK(r.termination == Termination::optimal_eta);
    CHECK(r.corrections_step3 == 0);
    CHECK(r.corrections_step4 == 0);
  }
}

TEST_CASE("scaled criterion still reaches the projection") {
  SplitMix64 rng(12);
  const PointCloud cloud = testhelp::random_cloud(rng, 3, 10, 1.0);
  const auto ref = testoracle::nearest(testhelp::rows(cloud), Vector::Zero(3));
  ProjectOptions o;
  o.scaled_criterion = true;
  const auto r = project(Vector::Zero(3), cloud, o);
  CHECK(r.termination == Termination::optimal_eta);
  CHECK((r.projection - ref.point).norm() < 1e-2);
}

TEST_CASE("termination names") {
  CHECK(to_string(Termination::optimal_eta) == "optimal_eta");
  CHECK(to_string(Termination::correction_failure) == "correction_failure");
  CHECK(to_string(CorrectionBranch::caratheodory) == "caratheodory");
}

}  // TEST_SUITE
