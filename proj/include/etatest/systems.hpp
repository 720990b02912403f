#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "etatest/types.hpp"

namespace etatest {

/// Plant dynamics (x, u) -> y, with y = x_dot or x' depending on time_kind.
class SystemSpec {
 public:
  using Dynamics = std::function<Vec(const Vec& x, const Vec& u)>;

  SystemSpec(std::string name, int n, int m, TimeKind kind, Dynamics dynamics, Vec equilibrium,
             Bounds bounds);

  Vec operator()(const Vec& x, const Vec& u) const { return dynamics_(x, u); }

  const std::string& name() const { return name_; }
  int n() const { return n_; }
  int m() const { return m_; }
  TimeKind time_kind() const { return kind_; }
  const Vec& equilibrium() const { return equilibrium_; }
  const Bounds& bounds() const { return bounds_; }

 private:
  std::string name_;
  int n_;
  int m_;
  TimeKind kind_;
  Dynamics dynamics_;
  Vec equilibrium_;
  Bounds bounds_;
};

struct VehicleParams {
  double k_f = -80000.0;  // N/rad
  double k_r = -80000.0;  // N/rad
  double l_f = 1.1;       // m
  double l_r = 1.9;       // m
  double mass = 2000.0;   // kg
  double i_z = 2000.0;    // kg m^2
  double u_long = 5.0;    // m/s
};

struct PendulumParams {
  double mass = 1.0;     // kg
  double length = 1.0;   // m
  double gravity = 9.8;  // m/s^2
};

/// Controlled Van der Pol oscillator, state (y, y_dot).
Vec oscillator_dynamics(const Vec& x, double u);

/// Linear 2DOF lateral vehicle model, state (y, phi, v, omega), input front wheel angle.
struct LinearModel {
  Mat A;
  Mat B;
};
LinearModel vehicle_matrices(const VehicleParams& p);

/// Rigid pendulum, state (theta, theta_dot).
Vec pendulum_dynamics(const Vec& x, double u, const PendulumParams& p);

SystemSpec oscillator_system();
SystemSpec vehicle_system(const VehicleParams& p = {});
SystemSpec pendulum_system(const PendulumParams& p = {}, double theta_e = 0.0);
SystemSpec linear_system(std::string name, const Mat& A, const Mat& B, TimeKind kind,
                         Bounds bounds);

/**
 * Feedback policy x -> u.
 *
 * A closed set of policy kinds, each evaluable and printable. Noisy wraps any
 * other policy with a perturbation that is a pure function of (seed, x).
 */
class Policy {
 public:
  struct LinearFeedback {
    Mat K;  // u = K x
  };
  struct OscillatorDamping {};  // u = -y^2 y_dot / 2
  struct PendulumDamping {
    double k;  // u = -k theta_dot
  };
  struct PendulumTopHold {
    double k;
    PendulumParams params;  // u = k theta_dot + m g l sin(theta)
  };
  struct Zero {
    int m = 1;
  };
  struct Noisy {
    std::shared_ptr<const Policy> base;
    double amplitude;
    std::uint64_t seed;
  };
  using Kind = std::variant<LinearFeedback, OscillatorDamping, PendulumDamping, PendulumTopHold,
                            Zero, Noisy>;

  Policy(Kind kind);  // NOLINT(google-explicit-constructor)

  Vec operator()(const Vec& x) const;
  int action_dim() const;
  std::string name() const;
  const Kind& kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Candidate Lyapunov function with analytic gradient.
class LyapunovFn {
 public:
  /// V(x) = (x - c)^T P (x - c)
  struct Quadratic {
    Mat P;
    Vec center;
  };
  /// V(x) = (x - x_e)^T P (x - x_e) / 3 + (g / l) (1 - cos(theta - theta_e)),
  /// with x_e = (theta_e, 0).
  struct PendulumEnergy {
    Mat P;
    double theta_e;
    double gravity;
    double length;
  };
  using Kind = std::variant<Quadratic, PendulumEnergy>;

  LyapunovFn(Kind kind);  // NOLINT(google-explicit-constructor)
  static LyapunovFn quadratic(const Mat& P);

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  const Kind& kind() const { return kind_; }
  bool is_quadratic() const { return std::holds_alternative<Quadratic>(kind_); }

 private:
  Kind kind_;
};

/// Model-based dV/dt = grad V(x)^T f(x, pi(x)). Needs the true plant.
double true_vdot(const SystemSpec& system, const Policy& policy, const LyapunovFn& V,
                 const Vec& x);

/// Optional parameter overrides applied by make_experiment.
struct ExperimentOverrides {
  std::optional<VehicleParams> vehicle;
  std::optional<PendulumParams> pendulum;
  std::optional<double> pendulum_gain;
};

/// A fully wired benchmark: plant, verification policy, Lyapunov candidate,
/// verification region, and the verdict the benchmark is designed to produce.
struct Experiment {
  std::string name;
  SystemSpec system;
  Policy policy;
  LyapunovFn lyapunov;
  Bounds bounds;
  Outcome expected;
  Mode mode;
  /// Threshold for the near-critical rule; only meaningful with Mode::Both.
  double epsilon_critical;
};

std::vector<std::string> experiment_names();
/// Throws Error on an unknown name.
Experiment make_experiment(std::string_view name, const ExperimentOverrides& overrides = {});

}  // namespace etatest
