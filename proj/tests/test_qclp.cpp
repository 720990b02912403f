#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "etatest/qclp.hpp"
#include "oracles.hpp"

using namespace etatest;
using doctest::Approx;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Ball ball(Vec c, double r) { return Ball{std::move(c), r}; }

bool feasible(std::span<const Ball> balls, const Vec& v, double tol) {
  for (const auto& b : balls) {
    if ((v - b.center).norm() > b.radius + tol) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("single ball closed form") {
  const std::vector<Ball> one{ball(vec2(0, 0), 1.0)};
  const auto r = max_linear(vec2(1, 0), one);
  REQUIRE(r.status == QclpStatus::Optimal);
  CHECK(r.value == Approx(1.0));
  CHECK((r.argpoint - vec2(1, 0)).norm() <= 1e-12);
  CHECK(min_linear(vec2(1, 0), one).value == Approx(-1.0));

  std::mt19937_64 rng(201);
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + t % 3;
    const Vec c = oracle::uniform_vec(rng, n, -3.0, 3.0);
    const std::vector<Ball> b{ball(oracle::uniform_vec(rng, n, -2.0, 2.0), oracle::uniform(rng, 0.0, 2.0))};
    const double expect = c.dot(b[0].center) + c.norm() * b[0].radius;
    CHECK(std::abs(max_linear(c, b).value - expect) <= 1e-10);
  }
}

TEST_CASE("tangent balls meet in a single point") {
  const std::vector<Ball> b{ball(vec2(0, 0), 1.0), ball(vec2(2, 0), 1.0)};
  const auto up = max_linear(vec2(0, 1), b);
  REQUIRE(up.status == QclpStatus::Optimal);
  CHECK(std::abs(up.value) <= 1e-6);
  const auto right = min_linear(vec2(1, 0), b);
  REQUIRE(right.status == QclpStatus::Optimal);
  CHECK(right.value == Approx(1.0).epsilon(1e-6));
}

TEST_CASE("separated balls are infeasible and no balls is unbounded") {
  const std::vector<Ball> b{ball(vec2(0, 0), 0.4), ball(vec2(2, 0), 0.4)};
  CHECK(max_linear(vec2(1, 0), b).status == QclpStatus::Infeasible);
  CHECK(pairwise_separated(b));
  const auto none = max_linear(vec2(1, 0), std::vector<Ball>{});
  CHECK(none.status == QclpStatus::Unbounded);
  CHECK(none.value == std::numeric_limits<double>::infinity());
}

TEST_CASE("three pairwise-overlapping balls with an empty common part") {
  // Each pair overlaps but no point lies in all three.
  const double s = std::sqrt(3.0);
  const std::vector<Ball> b{ball(vec2(0, 0), 1.05), ball(vec2(2, 0), 1.05),
                            ball(vec2(1, s), 1.05)};
  CHECK_FALSE(pairwise_separated(b));
  CHECK(max_linear(vec2(0.3, 1), b).status == QclpStatus::Infeasible);
}

TEST_CASE("zero objective returns zero at a feasible point") {
  std::mt19937_64 rng(203);
  const auto b = oracle::feasible_balls(rng, 3, 6, 0.05);
  const auto r = max_linear(Vec::Zero(3), b);
  REQUIRE(r.status == QclpStatus::Optimal);
  CHECK(r.value == 0.0);
  CHECK(feasible(b, r.argpoint, 1e-8));
}

TEST_CASE("random instances agree with the grid oracle") {
  std::mt19937_64 rng(205);
  for (int t = 0; t < 60; ++t) {
    const int n = 2 + t % 3;
    const auto balls = oracle::feasible_balls(rng, n, 1 + t % 10, 0.05);
    const Vec c = oracle::uniform_vec(rng, n, -2.0, 2.0);
    const auto r = max_linear(c, balls);
    REQUIRE(r.status == QclpStatus::Optimal);
    const double grid = oracle::qclp_grid(c, balls);
    CHECK(std::abs(r.value - grid) <= 1e-2 * (1.0 + std::abs(r.value)));
    CHECK(r.value >= grid - 1e-9);
    CHECK(feasible(balls, r.argpoint, 1e-8));
    CHECK(r.kkt_residual <= 1e-6);
  }
}

TEST_CASE("the solver value dominates every sampled feasible point") {
  std::mt19937_64 rng(207);
  for (int t = 0; t < 50; ++t) {
    const int n = 2 + t % 3;
    const auto balls = oracle::feasible_balls(rng, n, 2 + t % 8, 0.02);
    const Vec c = oracle::uniform_vec(rng, n, -2.0, 2.0);
    const double hi = max_linear(c, balls).value;
    const double lo = min_linear(c, balls).value;
    for (const Vec& v : oracle::sample_intersection(balls, rng, 200, 20000)) {
      CHECK(c.dot(v) <= hi + 1e-9);
      CHECK(c.dot(v) >= lo - 1e-9);
    }
  }
}

TEST_CASE("min is the negated max of the negated objective") {
  std::mt19937_64 rng(209);
  for (int t = 0; t < 50; ++t) {
    const auto balls = oracle::feasible_balls(rng, 3, 5, 0.05);
    const Vec c = oracle::uniform_vec(rng, 3, -1.0, 1.0);
    CHECK(min_linear(c, balls).value == -max_linear(-c, balls).value);
  }
}

TEST_CASE("shrinking a radius never raises the maximum") {
  std::mt19937_64 rng(211);
  for (int t = 0; t < 50; ++t) {
    auto balls = oracle::feasible_balls(rng, 2 + t % 3, 6, 0.1);
    const Vec c = oracle::uniform_vec(rng, static_cast<int>(balls[0].center.size()), -1.0, 1.0);
    const double before = max_linear(c, balls).value;
    balls[t % balls.size()].radius *= 0.97;
    const auto after = max_linear(c, balls);
    if (after.status == QclpStatus::Optimal) CHECK(after.value <= before + 1e-9);
  }
}

TEST_CASE("translation shifts the optimum by c^T t") {
  std::mt19937_64 rng(213);
  for (int t = 0; t < 30; ++t) {
    auto balls = oracle::feasible_balls(rng, 3, 5, 0.05);
    const Vec c = oracle::uniform_vec(rng, 3, -1.0, 1.0);
    const Vec shift = oracle::uniform_vec(rng, 3, -5.0, 5.0);
    const double base = max_linear(c, balls).value;
    for (auto& b : balls) b.center += shift;
    CHECK(max_linear(c, balls).value == Approx(base + c.dot(shift)).epsilon(1e-9));
  }
}

TEST_CASE("dropping balls never lowers the maximum") {
  std::mt19937_64 rng(215);
  for (int t = 0; t < 40; ++t) {
    auto balls = oracle::feasible_balls(rng, 3, 8, 0.05);
    const Vec c = oracle::uniform_vec(rng, 3, -1.0, 1.0);
    const double full = max_linear(c, balls).value;
    balls.resize(4);
    CHECK(max_linear(c, balls).value >= full - 1e-9);
  }
}

TEST_CASE("quadratic per-ball maximum") {
  const std::vector<Ball> unit{ball(vec2(0, 0), 1.0)};
  CHECK(max_quadratic_bound(Mat::Identity(2, 2), unit).value == Approx(1.0));
  Mat P = Mat::Zero(2, 2);
  P(0, 0) = 4.0;
  P(1, 1) = 1.0;
  const std::vector<Ball> shifted{ball(vec2(1, 0), 1.0)};
  CHECK(max_quadratic_bound(P, shifted).value == Approx(16.0));

  std::mt19937_64 rng(217);
  for (int t = 0; t < 40; ++t) {
    const int n = 2 + t % 2;
    Mat G(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) G(i, j) = oracle::uniform(rng, -1.0, 1.0);
    Mat Q = G.transpose() * G;
    if (t % 5 == 0) Q(0, 0) = Q(0, 1) = Q(1, 0) = 0.0;  // singular P
    const Ball b = ball(oracle::uniform_vec(rng, n, -1.0, 1.0), oracle::uniform(rng, 0.1, 1.0));
    const Vec shift = oracle::uniform_vec(rng, n, -0.5, 0.5);
    const double exact = max_quadratic_on_ball(Q, b, shift);
    const double sampled = oracle::sphere_max(Q, b, shift, rng, n == 2 ? 20000 : 200000);
    CHECK(exact >= sampled - 1e-12);
    CHECK(exact == Approx(sampled).epsilon(1e-2));
  }
}

TEST_CASE("the hard case of the secular equation") {
  // Center orthogonal to the top eigenvector: the maximizer sits off-axis.
  Mat P = Mat::Zero(2, 2);
  P(0, 0) = 3.0;
  P(1, 1) = 1.0;
  const Ball b = ball(vec2(0, 0.5), 1.0);
  std::mt19937_64 rng(219);
  const double exact = max_quadratic_on_ball(P, b, Vec::Zero(2));
  // Maximize 3 s^2 + (0.5 + t)^2 with s^2 + t^2 = 1: t = 0.25, value 3.375.
  CHECK(exact == Approx(3.375));
  CHECK(exact >= oracle::sphere_max(P, b, Vec::Zero(2), rng, 20000) - 1e-12);
}

TEST_CASE("the discrete bound dominates V at every feasible point") {
  std::mt19937_64 rng(221);
  for (int t = 0; t < 50; ++t) {
    const int n = 2 + t % 2;
    Mat G(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) G(i, j) = oracle::uniform(rng, -1.0, 1.0);
    const Mat P = G.transpose() * G;
    const auto balls = oracle::feasible_balls(rng, n, 3, 0.05);
    const auto bound = max_quadratic_bound(P, balls);
    REQUIRE(bound.status == QclpStatus::Optimal);
    for (const Vec& v : oracle::sample_intersection(balls, rng, 300, 30000)) {
      CHECK(v.dot(P * v) <= bound.value + 1e-12);
    }
  }
}

TEST_CASE("feasibility slack restores a common point") {
  const std::vector<Ball> apart{ball(vec2(0, 0), 0.4), ball(vec2(2, 0), 0.4)};
  const double s = feasibility_slack(apart);
  CHECK(std::abs(s - 0.6) <= 1e-7);
  const auto grown = inflated(apart, s);
  CHECK(max_linear(Vec::Zero(2), grown).status == QclpStatus::Optimal);
  CHECK(max_linear(Vec::Zero(2), inflated(apart, 0.99 * s)).status == QclpStatus::Infeasible);

  std::mt19937_64 rng(223);
  const auto ok = oracle::feasible_balls(rng, 3, 5, 0.05);
  CHECK(feasibility_slack(ok) == 0.0);
  CHECK(feasibility_slack(std::vector<Ball>{}) == 0.0);

  const auto e = elastic_max_linear(vec2(0, 1), apart);
  REQUIRE(e.result.status == QclpStatus::Optimal);
  CHECK(e.slack >= s);
  CHECK(std::abs(e.result.value) <= 1e-3);
}

TEST_CASE("instances serialize to JSON") {
  const std::vector<Ball> b{ball(vec2(0, 0), 1.0)};
  const std::string text = dump_instance(vec2(1, 2), b);
  CHECK(text.find("\"balls\"") != std::string::npos);
  CHECK(text.find("\"radius\"") != std::string::npos);
}
