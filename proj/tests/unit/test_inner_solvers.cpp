#include "polyproj/inner_solvers.hpp"

#include "helpers.hpp"
#include "oracle.hpp"

#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

using namespace polyproj;

namespace {

const PointCloud kFourPoints{{0, 4}, {0, 2}, {2, 2}, {-2, 1}};

Vector point_of(const ConvexCoefficients& c, const PointCloud& cloud) { return evaluate_point(c, cloud); }

}  // namespace

TEST_SUITE("inner_solvers") {

TEST_CASE("factory names") {
  for (const auto& n : solver_names()) CHECK(make_solver(n)->name() == n);
  CHECK(solver_names().size() == 4);
  CHECK_THROWS_AS(make_solver("simplex"), std::invalid_argument);
  CHECK(to_string(StopReason::timeout) == "timeout");
}

TEST_CASE("worked example with every solver") {
  for (const auto& n : solver_names()) {
    CAPTURE(n);
    const auto s = make_solver(n);
    const auto c = s->solve(Vector::Zero(2), testhelp::iota(4), kFourPoints);
    CHECK(c.support == testhelp::iota(4));
    CHECK(c.is_valid(1e-12));
    const Vector y = point_of(c, kFourPoints);
    CHECK(y[0] == doctest::Approx(-6.0 / 17).epsilon(1e-6));
    CHECK(y[1] == doctest::Approx(24.0 / 17).epsilon(1e-6));
    CHECK(c.weights[0] < 1e-6);
    CHECK(c.weights[1] < 1e-6);
    CHECK(c.weights[2] == doctest::Approx(7.0 / 17).epsilon(1e-5));
    CHECK(c.weights[3] == doctest::Approx(10.0 / 17).epsilon(1e-5));
  }
}

TEST_CASE("weights follow the order of the index list") {
  const IndexList idx{3, 0, 2};
  for (const auto& n : solver_names()) {
    CAPTURE(n);
    const auto c = make_solver(n)->solve(Vector::Zero(2), idx, kFourPoints);
    CHECK(c.support == idx);
    CHECK(c.weights[0] == doctest::Approx(10.0 / 17).epsilon(1e-5));
    CHECK(c.weights[2] == doctest::Approx(7.0 / 17).epsilon(1e-5));
  }
}

TEST_CASE("input validation") {
  const auto s = make_solver("qp");
  CHECK_THROWS_AS(s->solve(Vector::Zero(2), IndexList{}, kFourPoints), std::invalid_argument);
  CHECK_THROWS_AS(s->solve(Vector::Zero(2), IndexList{1, 1}, kFourPoints), std::invalid_argument);
  CHECK_THROWS_AS(s->solve(Vector::Zero(2), IndexList{7}, kFourPoints), std::out_of_range);
  CHECK_THROWS_AS(s->solve(Vector::Zero(3), IndexList{0}, kFourPoints), std::invalid_argument);
}

TEST_CASE("single point and query inside the hull") {
  for (const auto& n : solver_names()) {
    CAPTURE(n);
    const auto s = make_solver(n);
    const auto one = s->solve(Vector::Zero(2), IndexList{2}, kFourPoints);
    CHECK(one.weights[0] == 1.0);

    const Vector inside = Eigen::Vector2d(0.5, 2.5);  // within the triangle 0, 2, 3
    const auto c = s->solve(inside, testhelp::iota(4), kFourPoints);
    CHECK((point_of(c, kFourPoints) - inside).norm() < 1e-4);
  }
}

TEST_CASE("agreement with the enumeration oracle") {
  SplitMix64 rng(99);
  for (int trial = 0; trial < 80; ++trial) {
    const std::size_t d = 2 + trial % 3;
    const std::size_t l = 3 + trial % 9;
    const PointCloud cloud = testhelp::random_cloud(rng, d, l, 0.5 + trial % 2);
    const Vector z = testhelp::random_point(rng, d, 0.3);
    const auto ref = testoracle::nearest(testhelp::rows(cloud), z);
    for (const auto& n : solver_names()) {
      CAPTURE(n);
      CAPTURE(trial);
      const auto s = make_solver(n);
      SolverStats st;
      const auto c = s->solve(z, testhelp::iota(l), cloud, &st);
      CHECK(c.is_valid(1e-12));
      CHECK(st.terminated_by == StopReason::tolerance);
      const Vector y = point_of(c, cloud);
      CHECK((y - z).norm() <= ref.dist + 1e-6);
      CHECK((y - ref.point).norm() <= 1e-3);
      if (n != "mdm") CHECK(check_optimality(y, z, cloud, 10 * s->accuracy() * squared_scale(cloud, z)).satisfied);
    }
  }
}

TEST_CASE("larger clouds against the certified projection") {
  SplitMix64 rng(7);
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t d = 3 + 2 * (trial % 2);
    const PointCloud cloud = testhelp::random_cloud(rng, d, 200, 1.2);
    const Vector z = Vector::Zero(static_cast<Eigen::Index>(d));
    double cert = 0.0;
    const auto ref = testoracle::nearest_certified(testhelp::rows(cloud), z, &cert);
    REQUIRE(cert >= -1e-9);
    for (const std::string n : {"wolfe", "mdm", "qp"}) {
      CAPTURE(n);
      const auto c = make_solver(n)->solve(z, testhelp::iota(200), cloud);
      CHECK((point_of(c, cloud) - ref.point).norm() < 1e-4);
    }
  }
}

TEST_CASE("wolfe reports its working sets") {
  WolfeSolver s;
  std::vector<IndexList> sets;
  std::vector<Vector> weights;
  s.set_observer([&](const IndexList& set, const Vector& lam) {
    sets.push_back(set);
    weights.push_back(lam);
  });
  const auto c = s.solve(Vector::Zero(2), testhelp::iota(4), kFourPoints);
  REQUIRE(sets.size() >= 3);
  CHECK(sets[0] == IndexList{1});
  CHECK(sets[1] == IndexList{1, 3});
  CHECK(weights[1][0] == doctest::Approx(0.6));
  CHECK(weights[1][1] == doctest::Approx(0.4));
  IndexList last = sets.back();
  std::sort(last.begin(), last.end());
  CHECK(last == IndexList{2, 3});
  CHECK(c.weights[1] == 0.0);
}

TEST_CASE("iteration cap and deadline stop the iterative solvers") {
  SplitMix64 rng(3);
  const PointCloud cloud = testhelp::random_cloud(rng, 4, 300, 1.0);
  const Vector z = Vector::Zero(4);
  for (const std::string n : {"wolfe", "mdm"}) {
    CAPTURE(n);
    auto s = make_solver(n);
    s->config().max_iter = 2;
    SolverStats st;
    const auto c = s->solve(z, testhelp::iota(300), cloud, &st);
    CHECK(st.terminated_by == StopReason::iteration_cap);
    CHECK(st.inner_iterations <= 2);
    CHECK(c.is_valid(1e-12));

    auto t = make_solver(n);
    SolverStats st2;
    t->solve(z, testhelp::iota(300), cloud, &st2, Clock::now() - std::chrono::seconds(1));
    CHECK(st2.terminated_by == StopReason::timeout);
  }
}

TEST_CASE("qp and oracle guards") {
  SplitMix64 rng(1);
  const PointCloud big = testhelp::random_cloud(rng, 2, 13);
  CHECK_THROWS_AS(make_solver("oracle")->solve(Vector::Zero(2), testhelp::iota(13), big), std::invalid_argument);
  const PointCloud wide = testhelp::random_cloud(rng, 5, 4);
  CHECK_THROWS_AS(make_solver("oracle")->solve(Vector::Zero(5), testhelp::iota(4), wide), std::invalid_argument);
}

TEST_CASE("query at a vertex returns that vertex") {
  for (const auto& n : solver_names()) {
    CAPTURE(n);
    const auto c = make_solver(n)->solve(Vector(kFourPoints.point(3)), testhelp::iota(4), kFourPoints);
    CHECK(c.weights[3] == doctest::Approx(1.0));
  }
}

TEST_CASE("mdm on a symmetric segment") {
  const PointCloud seg{{1, 1}, {1, -1}};
  SolverStats st;
  const auto c = MdmSolver{}.solve(Vector::Zero(2), testhelp::iota(2), seg, &st);
  CHECK(c.weights[0] == doctest::Approx(0.5));
  CHECK(c.weights[1] == doctest::Approx(0.5));
  const auto one = MdmSolver{}.solve(Vector::Zero(2), IndexList{1}, seg);
  CHECK(one.weights[0] == 1.0);
}

TEST_CASE("solvers agree pairwise") {
  SplitMix64 rng(193);
  const MdmSolver tight({1e-10, 1'000'000});
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 2 + trial % 2;
    const std::size_t l = 3 + trial % 8;
    const PointCloud cloud = testhelp::random_cloud(rng, d, l, 0.8);
    const Vector z = testhelp::random_point(rng, d, 0.5);
    const auto idx = testhelp::iota(l);
    const Vector a = evaluate_point(WolfeSolver{}.solve(z, idx, cloud), cloud);
    const Vector b = evaluate_point(QpSolver{}.solve(z, idx, cloud), cloud);
    const Vector c = evaluate_point(OracleSolver{}.solve(z, idx, cloud), cloud);
    const Vector m = evaluate_point(tight.solve(z, idx, cloud), cloud);
    CAPTURE(trial);
    CHECK((a - b).norm() <= 1e-8);
    CHECK((a - c).norm() <= 1e-8);
    CHECK((b - c).norm() <= 1e-8);
    CHECK((m - c).norm() <= 1e-6);
  }
}

TEST_CASE("wolfe matches the oracle tightly in three dimensions") {
  SplitMix64 rng(36);
  for (int trial = 0; trial < 20; ++trial) {
    const PointCloud cloud = testhelp::random_cloud(rng, 3, 6, 1.0);
    const auto ref = testoracle::nearest(testhelp::rows(cloud), Vector::Zero(3));
    const auto c = WolfeSolver{}.solve(Vector::Zero(3), testhelp::iota(6), cloud);
    CHECK((evaluate_point(c, cloud) - ref.point).norm() <= 1e-8);
  }
}

TEST_CASE("wolfe leaves a zero weight when the query is outside the hull") {
  SplitMix64 rng(194);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 2 + trial % 3;
    const PointCloud cloud = testhelp::random_cloud(rng, d, d + 1 + trial % 3, 2.5);
    const auto c = WolfeSolver{}.solve(Vector::Zero(static_cast<Eigen::Index>(d)), testhelp::iota(cloud.size()), cloud);
    CHECK((c.weights.array() == 0.0).any());
  }
}

TEST_CASE("stats merge") {
  SolverStats a;
  a.inner_iterations = 3;
  SolverStats b;
  b.inner_iterations = 4;
  b.terminated_by = StopReason::iteration_cap;
  a.merge(b);
  CHECK(a.inner_iterations == 7);
  CHECK(a.terminated_by == StopReason::iteration_cap);
}

TEST_CASE("clones are independent") {
  auto s = make_solver("wolfe");
  auto c = s->clone();
  c->config().max_iter = 1;
  CHECK(s->config().max_iter == 1'000'000);
  CHECK(c->name() == "wolfe");
}

}  // TEST_SUITE
