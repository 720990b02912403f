#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "etatest/dataset.hpp"
#include "etatest/neighbor_index.hpp"

namespace etatest {

/// One neighbor's contribution: dy <= Lx * dx + Lu * du.
struct LipschitzConstraint {
  double dx;
  double du;
  double dy;
};

struct LipschitzEstimate {
  double lx = 0.0;
  double lu = 0.0;
  /// No neighbor other than the sample itself; (0, 0) carries no information.
  bool unconstrained = false;
};

struct LipschitzField {
  std::vector<LipschitzEstimate> entries;
  double delta = 0.0;
  double lambda = 1.0;

  std::size_t size() const { return entries.size(); }
  const LipschitzEstimate& operator[](std::size_t i) const { return entries[i]; }
};

/**
 * Smallest (Lx, Lu) >= 0 in the weighted norm lambda*Lx^2 + Lu^2 such that
 * every constraint holds.
 *
 * Solved exactly by an incremental two-dimensional method: constraints are
 * added one at a time, and whenever the current optimum violates a new one
 * the optimum moves onto its boundary line, where a one-dimensional problem
 * over the earlier constraints is solved in closed form. Worst case is
 * quadratic in the number of constraints.
 *
 * Throws Error if the constraints are infeasible, which happens only for a
 * constraint with dx = du = 0 and dy > 0.
 */
LipschitzEstimate solve_lipschitz_qp(std::span<const LipschitzConstraint> constraints,
                                     double lambda);

/// Constraints from the delta-neighborhood of sample i in joint (x, u) space.
std::vector<LipschitzConstraint> neighborhood_constraints(const Dataset& data,
                                                          const NeighborIndex& index,
                                                          std::size_t i, double delta);

LipschitzEstimate estimate_local(const Dataset& data, const NeighborIndex& index, std::size_t i,
                                 double delta, double lambda);

/// Estimates every sample in parallel. `threads` <= 0 uses the OpenMP default.
LipschitzField estimate_all(const Dataset& data, const NeighborIndex& index, double delta,
                            double lambda, int threads = 0);

namespace reference {
/// Serial loop with the same contract as etatest::estimate_all.
LipschitzField estimate_all(const Dataset& data, const NeighborIndex& index, double delta,
                            double lambda);
}  // namespace reference

}  // namespace etatest
