#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "etatest/systems.hpp"
#include "oracles.hpp"

using namespace etatest;
using doctest::Approx;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec scalar(double a) { return Vec::Constant(1, a); }

Vec random_state(std::mt19937_64& rng, const Bounds& b) {
  Vec x(static_cast<Eigen::Index>(b.size()));
  for (std::size_t k = 0; k < b.size(); ++k) x[k] = oracle::uniform(rng, b[k].lo, b[k].hi);
  return x;
}

}  // namespace

TEST_CASE("oscillator dynamics by substitution") {
  CHECK(oscillator_dynamics(vec2(0, 0), 0).isApprox(vec2(0, 0)));
  CHECK((oscillator_dynamics(vec2(1, 1), 0) - vec2(1, -1)).norm() < 1e-15);
  CHECK((oscillator_dynamics(vec2(0, 1), 0) - vec2(1, -0.5)).norm() < 1e-15);
}

TEST_CASE("pendulum dynamics by substitution") {
  const PendulumParams p;
  CHECK(pendulum_dynamics(vec2(0, 0), 0, p).norm() < 1e-15);
  CHECK(pendulum_dynamics(vec2(std::numbers::pi, 0), 0, p).norm() < 1e-14);
  CHECK((pendulum_dynamics(vec2(std::numbers::pi / 2, 0), 0, p) - vec2(0, -14.7)).norm() < 1e-12);
}

TEST_CASE("vehicle matrices from the parameter table") {
  const auto [A, B] = vehicle_matrices(VehicleParams{});
  CHECK(A(2, 2) == Approx(-16.0));
  CHECK(A(2, 3) == Approx(1.4));
  CHECK(A(3, 2) == Approx(6.4));
  CHECK(A(3, 3) == Approx(-38.56));
  CHECK(B(2, 0) == Approx(40.0));
  CHECK(B(3, 0) == Approx(44.0));
  CHECK(A(0, 1) == Approx(5.0));
  CHECK(A(0, 2) == 1.0);
  CHECK(A(1, 3) == 1.0);
  CHECK(B(0, 0) == 0.0);
  CHECK(B(1, 0) == 0.0);

  VehicleParams heavy;
  heavy.mass *= 2.0;
  const auto [A2, B2] = vehicle_matrices(heavy);
  CHECK(A2(2, 2) == Approx(A(2, 2) / 2.0));
  // The -U term of the lateral coupling does not scale with mass.
  CHECK(A2(2, 3) == Approx((A(2, 3) + heavy.u_long) / 2.0 - heavy.u_long));
  CHECK(B2(2, 0) == Approx(B(2, 0) / 2.0));
  CHECK(A2.row(3).isApprox(A.row(3)));
}

TEST_CASE("experiment registry") {
  const auto names = experiment_names();
  CHECK(names.size() == 7);
  CHECK_THROWS_AS(make_experiment("bogus"), Error);

  const auto osc = make_experiment("osc-stable");
  const auto* q = std::get_if<LyapunovFn::Quadratic>(&osc.lyapunov.kind());
  REQUIRE(q != nullptr);
  CHECK(q->P(0, 0) == 2.25);
  CHECK(q->P(0, 1) == 0.5);
  CHECK(q->P(1, 1) == 2.0);
  CHECK(osc.bounds.size() == 2);
  CHECK(osc.bounds[0].lo == -1.0);
  CHECK(osc.policy(vec2(1.0, 1.0))[0] == -0.5);

  const auto pend = make_experiment("pend-stable");
  const auto* e = std::get_if<LyapunovFn::PendulumEnergy>(&pend.lyapunov.kind());
  REQUIRE(e != nullptr);
  CHECK(e->P(0, 0) == Approx(1.125));
  CHECK(e->P(0, 1) == Approx(0.75));
  CHECK(e->P(1, 1) == Approx(1.0));
  CHECK(pend.bounds[0].lo == Approx(-std::numbers::pi / 2));

  const auto up = make_experiment("pend-unstable");
  const auto* eu = std::get_if<LyapunovFn::PendulumEnergy>(&up.lyapunov.kind());
  REQUIRE(eu != nullptr);
  CHECK(eu->P(0, 1) == Approx(-0.75));
  CHECK(eu->theta_e == Approx(std::numbers::pi));
  CHECK(up.bounds[0].lo == Approx(std::numbers::pi / 2));

  const auto crit = make_experiment("pend-critical");
  CHECK(std::holds_alternative<Policy::Zero>(crit.policy.kind()));
  CHECK(crit.mode == Mode::Both);
  CHECK(crit.expected == Outcome::NearCritical);
  const Vec x = vec2(0.3, -1.2);
  CHECK(crit.lyapunov.value(x) ==
        Approx(1.2 * 1.2 / 3.0 + 9.8 * (1.0 - std::cos(0.3))).epsilon(1e-14));
}

TEST_CASE("overrides reach the plant") {
  ExperimentOverrides o;
  PendulumParams p;
  p.length = 2.0;
  o.pendulum = p;
  o.pendulum_gain = 1.0;
  const auto ex = make_experiment("pend-stable", o);
  const Vec f = ex.system(vec2(std::numbers::pi / 2, 0.0), scalar(0.0));
  CHECK(f[1] == Approx(-3.0 * 9.8 / 4.0));
  CHECK(ex.policy(vec2(0.0, 2.0))[0] == Approx(-2.0));
}

TEST_CASE("true dV/dt hand substitution for osc-stable at (1, 1)") {
  const auto ex = make_experiment("osc-stable");
  CHECK(true_vdot(ex.system, ex.policy, ex.lyapunov, vec2(1.0, 1.0)) == Approx(-2.0));
}

TEST_CASE("free pendulum conserves energy") {
  const auto ex = make_experiment("pend-critical");
  std::mt19937_64 rng(17);
  for (int s = 0; s < 1000; ++s) {
    const Vec x = random_state(rng, ex.bounds);
    CHECK(std::abs(true_vdot(ex.system, ex.policy, ex.lyapunov, x)) <= 1e-9);
  }
}

TEST_CASE("every experiment: V vanishes at the equilibrium and is positive elsewhere") {
  std::mt19937_64 rng(23);
  for (const auto& name : experiment_names()) {
    CAPTURE(name);
    const auto ex = make_experiment(name);
    const Vec xe = ex.system.equilibrium();
    CHECK(std::abs(ex.lyapunov.value(xe)) <= 1e-12);
    CHECK(ex.system(xe, ex.policy(xe)).norm() <= 1e-12);
    for (int s = 0; s < 1000; ++s) {
      const Vec x = random_state(rng, ex.bounds);
      if ((x - xe).norm() < 1e-9) continue;
      CHECK(ex.lyapunov.value(x) > 0.0);
    }
  }
}

TEST_CASE("analytic gradients agree with finite differences") {
  std::mt19937_64 rng(29);
  for (const auto& name : experiment_names()) {
    CAPTURE(name);
    const auto ex = make_experiment(name);
    for (int s = 0; s < 50; ++s) {
      const Vec x = random_state(rng, ex.bounds);
      const Vec fd = oracle::fd_gradient([&](const Vec& z) { return ex.lyapunov.value(z); }, x);
      CHECK((ex.lyapunov.gradient(x) - fd).norm() <= 1e-6 * (1.0 + fd.norm()));
    }
  }
}

TEST_CASE("linear feedback is linear and noisy policies are deterministic") {
  const auto veh = make_experiment("veh-stable");
  std::mt19937_64 rng(31);
  const Vec x = oracle::uniform_vec(rng, 4, -1.0, 1.0);
  CHECK((veh.policy(2.5 * x) - 2.5 * veh.policy(x)).norm() <= 1e-12 * (1.0 + veh.policy(x).norm()));

  const auto base = std::make_shared<const Policy>(make_experiment("osc-stable").policy);
  const Policy noisy_a(Policy::Noisy{base, 0.01, 9});
  const Policy noisy_b(Policy::Noisy{base, 0.01, 9});
  const Policy noisy_c(Policy::Noisy{base, 0.01, 10});
  const Vec s = vec2(0.2, -0.7);
  CHECK(noisy_a(s) == noisy_b(s));
  CHECK(noisy_a(s) != noisy_c(s));
  CHECK(std::abs(noisy_a(s)[0] - (*base)(s)[0]) <= 0.01);
}

TEST_CASE("policy actions by substitution") {
  const auto up = make_experiment("pend-unstable");
  const Vec x = vec2(std::numbers::pi / 2, 2.0);
  CHECK(up.policy(x)[0] == Approx(0.5 * 2.0 + 9.8));
  const auto osc_u = make_experiment("osc-unstable");
  CHECK(osc_u.policy(vec2(0.3, -0.4))[0] == Approx(-0.4));
  const auto crit = make_experiment("pend-critical");
  CHECK(crit.policy(x)[0] == 0.0);
}

TEST_CASE("vehicle designs give a stabilizing and a destabilizing gain") {
  const auto [A, B] = vehicle_matrices(VehicleParams{});
  const auto stable = make_experiment("veh-stable");
  const auto unstable = make_experiment("veh-unstable");
  const auto& Ks = std::get<Policy::LinearFeedback>(stable.policy.kind()).K;
  const auto& Ku = std::get<Policy::LinearFeedback>(unstable.policy.kind()).K;
  const Mat As = A + B * Ks;
  const Mat Au = A + B * Ku;
  CHECK(oracle::spectral_abscissa_charpoly(As) < 0.0);
  CHECK(oracle::spectral_abscissa_charpoly(Au) > 0.0);
}
