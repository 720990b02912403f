#include "etatest/lipschitz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "parallel.hpp"

namespace etatest {

namespace {

// Half-plane g . z >= d in the scaled coordinates z = (sqrt(lambda) Lx, Lu).
struct HalfPlane {
  double g0;
  double g1;
  double d;

  double slack(double z0, double z1) const { return g0 * z0 + g1 * z1 - d; }
};

}  // namespace

LipschitzEstimate solve_lipschitz_qp(std::span<const LipschitzConstraint> constraints,
                                     double lambda) {
  if (!(lambda > 0.0)) throw Error("lambda must be positive");
  const double root = std::sqrt(lambda);

  std::vector<HalfPlane> kept{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
  kept.reserve(constraints.size() + 2);
  double z0 = 0.0;
  double z1 = 0.0;

  for (std::size_t k = 0; k < constraints.size(); ++k) {
    const auto& c = constraints[k];
    // Nonpositive right-hand sides hold for any nonnegative constants.
    if (!(c.dy > 0.0)) continue;
    const HalfPlane h{c.dx / root, c.du, c.dy};
    if (h.slack(z0, z1) >= 0.0) {
      kept.push_back(h);
      continue;
    }
    const double norm_sq = h.g0 * h.g0 + h.g1 * h.g1;
    if (!(norm_sq > 0.0)) {
      throw Error("infeasible Lipschitz constraints: zero distance in (x, u) with dy = " +
                  std::to_string(c.dy));
    }
    // The new optimum lies on the line g . z = d: z = p + t w, with p the
    // foot of the perpendicular from the origin and w a unit tangent.
    const double norm = std::sqrt(norm_sq);
    const double p0 = h.d * h.g0 / norm_sq;
    const double p1 = h.d * h.g1 / norm_sq;
    const double w0 = -h.g1 / norm;
    const double w1 = h.g0 / norm;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (const auto& e : kept) {
      const double at_p = e.slack(p0, p1);
      const double along = e.g0 * w0 + e.g1 * w1;
      const double scale = std::abs(e.g0) + std::abs(e.g1);
      if (std::abs(along) <= 1e-15 * scale) {
        if (at_p < -1e-12 * (1.0 + std::abs(e.d))) {
          throw Error("infeasible Lipschitz constraints (parallel constraint conflict)");
        }
        continue;
      }
      const double t = -at_p / along;
      if (along > 0.0) {
        lo = std::max(lo, t);
      } else {
        hi = std::min(hi, t);
      }
    }
    // lo > hi only at rounding level, since large constants satisfy everything.
    const double t = lo <= hi ? std::clamp(0.0, lo, hi) : 0.5 * (lo + hi);
    z0 = p0 + t * w0;
    z1 = p1 + t * w1;
    kept.push_back(h);
  }

  return {std::max(0.0, z0) / root, std::max(0.0, z1), false};
}

std::vector<LipschitzConstraint> neighborhood_constraints(const Dataset& data,
                                                          const NeighborIndex& index,
                                                          std::size_t i, double delta) {
  std::vector<LipschitzConstraint> out;
  const auto xi = data.x(i);
  const auto ui = data.u(i);
  const auto yi = data.y(i);
  for (std::size_t j : index.query(xi, ui, delta)) {
    if (j == i) continue;
    out.push_back({(xi - data.x(j)).norm(), (ui - data.u(j)).norm(), (yi - data.y(j)).norm()});
  }
  return out;
}

LipschitzEstimate estimate_local(const Dataset& data, const NeighborIndex& index, std::size_t i,
                                 double delta, double lambda) {
  if (!(delta > 0.0)) throw Error("delta must be positive");
  if (i >= data.size()) throw Error("sample index out of range");
  const auto constraints = neighborhood_constraints(data, index, i, delta);
  if (constraints.empty()) return {0.0, 0.0, true};
  try {
    return solve_lipschitz_qp(constraints, lambda);
  } catch (const Error& e) {
    throw Error("sample " + std::to_string(i) + ": " + e.what());
  }
}

LipschitzField estimate_all(const Dataset& data, const NeighborIndex& index, double delta,
                            double lambda, int threads) {
  if (!(delta > 0.0)) throw Error("delta must be positive");
  if (!(lambda > 0.0)) throw Error("lambda must be positive");
  LipschitzField field{std::vector<LipschitzEstimate>(data.size()), delta, lambda};
  detail::parallel_for(static_cast<std::int64_t>(data.size()), threads, [&](std::int64_t i) {
    field.entries[i] = estimate_local(data, index, static_cast<std::size_t>(i), delta, lambda);
  });
  return field;
}

namespace reference {

LipschitzField estimate_all(const Dataset& data, const NeighborIndex& index, double delta,
                            double lambda) {
  LipschitzField field{{}, delta, lambda};
  field.entries.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    field.entries.push_back(estimate_local(data, index, i, delta, lambda));
  }
  return field;
}

}  // namespace reference

}  // namespace etatest
