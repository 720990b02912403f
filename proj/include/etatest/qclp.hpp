#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "etatest/types.hpp"

namespace etatest {

/// Closed Euclidean ball {v : ||v - center|| <= radius}.
struct Ball {
  Vec center;
  double radius = 0.0;
};

enum class QclpStatus { Optimal, Infeasible, Unbounded };
std::string_view to_string(QclpStatus status);

struct QclpResult {
  QclpStatus status = QclpStatus::Unbounded;
  double value = 0.0;
  Vec argpoint;
  /// ||c - sum_j 2 mu_j (argpoint - a_j)|| / (1 + ||c||) over the active set,
  /// with mu >= 0 fitted by nonnegative least squares.
  double kkt_residual = 0.0;
  std::vector<std::size_t> active_set;
  Vec multipliers;  // aligned with active_set
};

/// Absolute tolerance on ||v - a_j|| - r_j when deciding feasibility.
inline constexpr double kFeasibilityTol = 1e-8;

/**
 * max c^T v subject to ||v - a_j|| <= r_j for every ball.
 *
 * Constraint generation over a small working set: the current optimum over
 * the working set is checked against all balls, the most violated ball is
 * added, and the restricted problem is re-solved exactly by enumerating
 * sphere-intersection candidates over subsets of at most n working balls.
 * The working set is then pruned to the subset that produced the optimum.
 *
 * Infeasible when a ball is separated from the starting ball or when no
 * candidate of a working set is feasible (which certifies an empty
 * intersection). An empty ball list is Unbounded. For c = 0 the value is 0 at some feasible point.
 */
QclpResult max_linear(const Vec& c, std::span<const Ball> balls);

/// min c^T v over the same set, computed as -max_linear(-c).
QclpResult min_linear(const Vec& c, std::span<const Ball> balls);

/**
 * Smallest s >= 0 such that the balls with radii r_j + s share a point,
 * i.e. min over v of max_j (||v - a_j|| - r_j), clipped at zero.
 *
 * Grows a working set from a subset with an empty intersection, solving
 * each working set by bisection on the feasibility answer of max_linear.
 * The returned value is always on the feasible side (inflating by it yields
 * a nonempty intersection) and exceeds the minimum by at most 1e-6 of the
 * largest radius. Zero for an empty or already feasible ball list.
 */
double feasibility_slack(std::span<const Ball> balls);

/// As above, starting from `infeasible_subset`, indices of balls already
/// known to have no common point (e.g. the active set of an Infeasible
/// max_linear result).
double feasibility_slack(std::span<const Ball> balls,
                         std::span<const std::size_t> infeasible_subset);

/// Copy of the balls with every radius increased by `slack`.
std::vector<Ball> inflated(std::span<const Ball> balls, double slack);

struct ElasticResult {
  QclpResult result;
  double slack = 0.0;  // radius growth that was applied
};

/**
 * max_linear, except that an empty intersection is replaced by the balls
 * grown by feasibility_slack(). At that slack the intersection can collapse
 * to a point the constrained solve misses, so the slack is nudged upward by
 * a relative 1e-9, doubling, until the solve succeeds.
 */
ElasticResult elastic_max_linear(const Vec& c, std::span<const Ball> balls);
ElasticResult elastic_min_linear(const Vec& c, std::span<const Ball> balls);

/// Exact maximum over one ball, for symmetric P >= 0.
/// `shift` is subtracted from the ball center first, i.e. the objective is
/// (v - shift)^T P (v - shift).
double max_quadratic_on_ball(const Mat& P, const Ball& ball, const Vec& shift);

struct QuadraticBound {
  QclpStatus status = QclpStatus::Unbounded;
  double value = 0.0;
  std::size_t tightest_ball = 0;
};

/**
 * Upper bound on max (v - shift)^T P (v - shift) over the ball intersection:
 * the minimum over balls of the exact per-ball maximum. Conservative, since
 * the intersection lies inside every ball.
 */
QuadraticBound max_quadratic_bound(const Mat& P, std::span<const Ball> balls, const Vec& shift);
QuadraticBound max_quadratic_bound(const Mat& P, std::span<const Ball> balls);

/// True when some pair of balls is strictly separated.
bool pairwise_separated(std::span<const Ball> balls, double tol = kFeasibilityTol);

/// KKT stationarity residual of a candidate optimum; also returns multipliers.
double kkt_residual(const Vec& c, std::span<const Ball> balls, const Vec& point,
                    std::span<const std::size_t> active, Vec* multipliers = nullptr);

/// JSON dump of an instance for reproducing solver issues.
std::string dump_instance(const Vec& c, std::span<const Ball> balls);

}  // namespace etatest
