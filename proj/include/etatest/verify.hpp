#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "etatest/dataset.hpp"
#include "etatest/lipschitz.hpp"
#include "etatest/neighbor_index.hpp"
#include "etatest/qclp.hpp"
#include "etatest/systems.hpp"

namespace etatest {

struct VerifyOptions {
  double delta = 0.1;
  Mode mode = Mode::Stability;
  /// States within eq_tol of the equilibrium are exempt from the sign test.
  double eq_tol = 0.0;
  Vec equilibrium;  // empty means the origin
  double epsilon_critical = 0.1;
  /// Stop at the first state that fails a single-mode test.
  bool fail_fast = false;
  int threads = 0;
  /// When the balls at a state have an empty intersection, grow every radius
  /// by the smallest common slack that makes it nonempty and solve that
  /// problem instead of reporting the state as infeasible.
  bool restore_feasibility = true;
};

/// eq_tol used when none is given: 1e-6 of the bounds diagonal.
double default_eq_tol(const Bounds& bounds);

struct PointReport {
  std::size_t index = 0;
  Vec x;
  Vec u_policy;
  /// Neighbors that contributed a ball (flagged Lipschitz entries are skipped).
  std::size_t neighbors = 0;
  std::optional<double> eta_max;
  std::optional<double> eta_min;
  std::optional<double> true_vdot;
  QclpStatus status = QclpStatus::Unbounded;
  /// Radius slack added to restore a nonempty intersection (0 when none was needed).
  double slack = 0.0;
  bool exempt = false;

  bool unconstrained() const { return neighbors == 0; }
};

struct VerdictCounts {
  std::size_t points = 0;
  std::size_t exempt = 0;
  std::size_t unconstrained = 0;
  std::size_t infeasible = 0;
  std::size_t restored = 0;
  std::size_t eta_max_negative = 0;
  std::size_t eta_min_positive = 0;

  friend bool operator==(const VerdictCounts&, const VerdictCounts&) = default;
};

struct Verdict {
  Outcome overall = Outcome::Indeterminate;
  std::vector<PointReport> reports;
  double epsilon_critical = 0.0;
  VerdictCounts counts;
  /// Sample indices whose QCLP had no constraints.
  std::vector<std::size_t> unconstrained;
};

/// r_ij = Lx_j d(x_i, x_j) + Lu_j d(u_pi, u_j).
double radius(const Eigen::Ref<const Vec>& x_i, const Eigen::Ref<const Vec>& u_pi,
              const Eigen::Ref<const Vec>& x_j, const Eigen::Ref<const Vec>& u_j,
              const LipschitzEstimate& at_j);

/// Balls bounding f(x, pi(x)) built from the delta-neighbors of (x, pi(x)).
/// `used` receives the dataset index of each ball when non-null.
std::vector<Ball> neighbor_balls(const Dataset& data, const NeighborIndex& index,
                                 const LipschitzField& field, const Vec& x, const Vec& u_pi,
                                 double delta, std::vector<std::size_t>* used = nullptr);

/// Solves the per-state problems for an arbitrary state (not necessarily a sample).
PointReport evaluate_state(const Dataset& data, const NeighborIndex& index, const Policy& policy,
                           const LyapunovFn& V, const LipschitzField& field, const Vec& x,
                           double delta, Mode mode, bool restore_feasibility = true);

/**
 * Continuous-time eta-test over every sample of the dataset.
 *
 * For each state the worst-case dV/dt over the ball intersection is computed
 * (max for stability, min for instability, both for Mode::Both) and the
 * overall verdict follows classify(). All samples are evaluated unless
 * fail_fast is set in a single mode.
 */
Verdict eta_test(const Dataset& data, const NeighborIndex& index, const Policy& policy,
                 const LyapunovFn& V, const LipschitzField& field, const VerifyOptions& options);

/**
 * Discrete-time test: per sample, an upper bound on V(x') over the ball
 * intersection minus V(x) is stored in eta_max. Requires a quadratic V.
 */
Verdict eta_test_discrete(const Dataset& data, const NeighborIndex& index, const Policy& policy,
                          const LyapunovFn& V, const LipschitzField& field,
                          const VerifyOptions& options);

/// Overall verdict from per-state reports. Exempt reports are ignored; an
/// empty set of decisive reports is Indeterminate.
Outcome classify(std::span<const PointReport> reports, double epsilon_critical, Mode mode);

VerdictCounts count(std::span<const PointReport> reports);

/// Fills true_vdot on every report from the model.
void attach_true_vdot(Verdict& verdict, const SystemSpec& system, const Policy& policy,
                      const LyapunovFn& V);

namespace reference {
/// Serial loop with the same contract as etatest::eta_test (fail_fast ignored).
Verdict eta_test(const Dataset& data, const NeighborIndex& index, const Policy& policy,
                 const LyapunovFn& V, const LipschitzField& field, const VerifyOptions& options);
}  // namespace reference

}  // namespace etatest
