#include "polyproj/accel_distance.hpp"
#include "polyproj/generators.hpp"

#include "helpers.hpp"
#include "oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <set>
#include <string>

using namespace polyproj;

namespace {

Vector v2(double a, double b) { return Vector(Eigen::Vector2d(a, b)); }

void check_side(const ConvexCoefficients& c, CorrectionBranch branch) {
  CHECK(c.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((c.weights.array() >= 0.0).all());
  if (branch != CorrectionBranch::none) CHECK((c.weights.array() == 0.0).any());
}

}  // namespace

TEST_SUITE("accel_distance") {

TEST_CASE("pair state") {
  const PointCloud p{{1, 0}, {3, 0}};
  const PointCloud q{{-1, 0}, {-1, 4}};
  const auto st = make_pair_state({0, 1}, v2(0.5, 0.5), {0, 1}, v2(1, 0), p, q);
  CHECK(st.v.isApprox(v2(2, 0)));
  CHECK(st.w.isApprox(v2(-1, 0)));
  CHECK(st.theta == doctest::Approx(3.0));
}

TEST_CASE("pair index removal") {
  const PointCloud p{{1, 0}, {3, 0}, {2, 1}};
  const PointCloud q{{-1, 0}, {-1, 4}, {-2, 2}};
  const auto st =
      make_pair_state({0, 1, 2}, Eigen::Vector3d(0.5, 0.5, 0), {0, 1, 2}, Eigen::Vector3d(0, 0.3, 0.7), p, q);
  const auto both = pair_index_removal(st, p, q, true, true);
  REQUIRE(both.p);
  REQUIRE(both.q);
  CHECK(*both.p == 2);
  CHECK(*both.q == 0);
  const auto only_q = pair_index_removal(st, p, q, false, true);
  CHECK_FALSE(only_q.p);
  CHECK(only_q.q);
}

TEST_CASE("correction: P blends, Q adopts") {
  const PointCloud p{{1, 1}, {2, 1}, {1, 2}};
  const PointCloud q{{-1, 1}, {3, 1}, {0, -2}};
  auto st = make_pair_state({0, 1, 2}, Vector::Constant(3, 1.0 / 3), {0, 1, 2}, Vector::Constant(3, 1.0 / 3),
                            p, q);
  st.rho_x = -1.0;
  const double before = st.theta;
  const auto out = coefficients_correction(st, p, q, Tolerances{}, std::nullopt);
  REQUIRE(out.ok);
  CHECK(out.branch_p == CorrectionBranch::blend);
  CHECK(out.branch_q == CorrectionBranch::adopt);
  check_side(st.coeffs_p, out.branch_p);
  check_side(st.coeffs_q, out.branch_q);
  CHECK(st.v.isApprox(v2(7.0 / 6, 1)));
  CHECK(st.theta <= before);
  CHECK(st.theta < 1e-12);
  CHECK(st.correction_attempted);
}

TEST_CASE("correction: P skipped when its test holds, Q reduced") {
  const PointCloud p{{0, -1}, {5, -1}};
  const PointCloud q{{-1, 1}, {0, 1}, {1, 1}};
  auto st = make_pair_state({0, 1}, v2(1, 0), {0, 1, 2}, Eigen::Vector3d(0.25, 0.5, 0.25), p, q);
  st.rho_x = 0.0;
  const auto out = coefficients_correction(st, p, q, Tolerances{}, 3.0);
  REQUIRE(out.ok);
  CHECK(out.branch_p == CorrectionBranch::none);
  CHECK(out.branch_q == CorrectionBranch::caratheodory);
  check_side(st.coeffs_q, out.branch_q);
  CHECK(st.theta < 3.0);
  CHECK(st.w.isApprox(v2(0, 1)));
}

TEST_CASE("correction: P reduced, single-point Q skipped") {
  const PointCloud p{{-1, 1}, {0, 1}, {1, 1}};
  const PointCloud q{{0, -1}};
  auto st = make_pair_state({0, 1, 2}, Eigen::Vector3d(0.25, 0.5, 0.25), {0}, Vector::Ones(1), p, q);
  st.rho_x = -1.0;
  const auto out = coefficients_correction(st, p, q, Tolerances{}, 3.0);
  REQUIRE(out.ok);
  CHECK(out.branch_p == CorrectionBranch::caratheodory);
  CHECK(out.branch_q == CorrectionBranch::none);
  check_side(st.coeffs_p, out.branch_p);
  CHECK(st.theta < 3.0);
}

TEST_CASE("correction: fixed sides are skipped") {
  const PointCloud p{{1, 1}, {2, 1}, {1, 2}};
  const PointCloud q{{-1, 1}, {3, 1}, {0, -2}};
  auto st = make_pair_state({0, 1, 2}, Vector::Constant(3, 1.0 / 3), {0, 1, 2}, Vector::Constant(3, 1.0 / 3),
                            p, q);
  st.rho_x = -1.0;
  const auto out = coefficients_correction(st, p, q, Tolerances{}, std::nullopt, true, true);
  CHECK(out.branch_p == CorrectionBranch::none);
  CHECK(out.branch_q == CorrectionBranch::none);
}

TEST_CASE("correction failure leaves the pair alone") {
  const PointCloud p{{0, -1}, {5, -1}};
  const PointCloud q{{-1, 1}, {0, 1}, {1, 1}};
  auto st = make_pair_state({0, 1}, v2(1, 0), {0, 1, 2}, Eigen::Vector3d(0.25, 0.5, 0.25), p, q);
  const auto before = st.coeffs_q.weights;
  const auto out = coefficients_correction(st, p, q, Tolerances{}, st.theta);
  CHECK_FALSE(out.ok);
  CHECK(out.branch_q == CorrectionBranch::caratheodory);
  CHECK(st.coeffs_q.weights == before);
  CHECK_FALSE(st.correction_attempted);
}

TEST_CASE("distance matches the pair oracle") {
  SplitMix64 rng(515);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t d = 2 + trial % 2;
    const std::size_t lp = 4 + trial % 5;
    const std::size_t lq = 4 + (trial / 3) % 5;
    const PointCloud p = testhelp::random_cloud(rng, d, lp, 1.3);
    const PointCloud q = testhelp::random_cloud(rng, d, lq, -1.3);
    const auto ref = testoracle::pair(testhelp::rows(p), testhelp::rows(q));
    for (const std::string n : {"qp", "wolfe", "pairqp"}) {
      for (bool ideal : {false, true}) {
        CAPTURE(trial);
        CAPTURE(n);
        CAPTURE(ideal);
        DistanceOptions o;
        o.solver = n;
        o.ideal = ideal;
        const auto r = distance(p, q, o);
        CHECK(r.termination == Termination::optimal_eta);
        CHECK(((r.v - r.w) - (ref.v - ref.w)).norm() <= std::sqrt(2 * o.eta));
        CHECK(decay_audit(r.theta_trace));
        CHECK_FALSE(r.repeated_index_pair);
        CHECK(r.coeffs_p.is_valid(1e-12));
        CHECK(r.coeffs_q.is_valid(1e-12));
      }
    }
  }
}

TEST_CASE("unaccelerated distance") {
  SplitMix64 rng(9);
  const PointCloud p = testhelp::random_cloud(rng, 3, 40, 1.5);
  const PointCloud q = testhelp::random_cloud(rng, 3, 40, -1.5);
  DistanceOptions plain;
  plain.accelerated = false;
  DistanceOptions accel;
  const auto a = distance(p, q, plain);
  const auto b = distance(p, q, accel);
  CHECK(a.termination == Termination::optimal_eta);
  CHECK(a.outer_iterations == 0);
  CHECK(a.distance == doctest::Approx(b.distance).epsilon(1e-4));
}

TEST_CASE("two cubes stay about two apart") {
  for (std::uint64_t seed = 10; seed < 14; ++seed) {
    const auto inst = gen_two_cubes(3, 200, seed);
    const auto r = distance(inst.cloud_p, *inst.cloud_q, DistanceOptions{});
    CHECK(r.termination == Termination::optimal_eta);
    CHECK(r.distance >= 1.98);
    CHECK(r.distance <= 2.02);
    CHECK(check_pair_optimality(r.v, r.w, inst.cloud_p, *inst.cloud_q, 1e-4).satisfied);
  }
}

TEST_CASE("distance validates inputs") {
  const PointCloud p{{0, 0}, {1, 0}, {0, 1}};
  const PointCloud q3{{0, 0, 1}};
  CHECK_THROWS_AS(distance(p, q3, DistanceOptions{}), std::invalid_argument);
  DistanceOptions o;
  o.solver = "nope";
  CHECK_THROWS_AS(distance(p, p, o), std::invalid_argument);
  o.solver = "qp";
  o.init_p = {0, 1, 9};
  const PointCloud big{{0, 0}, {1, 0}, {0, 1}, {1, 1}, {2, 2}, {3, 3}};
  CHECK_THROWS_AS(distance(big, big, o), std::out_of_range);
}

TEST_CASE("deadline") {
  const auto inst = gen_two_cubes(3, 500, 3);
  DistanceOptions o;
  o.deadline = Clock::now() - std::chrono::seconds(1);
  CHECK(distance(inst.cloud_p, *inst.cloud_q, o).termination == Termination::timeout);
}

}  // TEST_SUITE
