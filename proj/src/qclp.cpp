#include "etatest/qclp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <json.hpp>

namespace etatest {

std::string_view to_string(QclpStatus status) {
  switch (status) {
    case QclpStatus::Optimal: return "Optimal";
    case QclpStatus::Infeasible: return "Infeasible";
    case QclpStatus::Unbounded: return "Unbounded";
  }
  return "Unbounded";
}

namespace {

constexpr int kMaxIterations = 1000;

double violation(const Ball& b, const Vec& v) { return (v - b.center).norm() - b.radius; }

void validate(std::span<const Ball> balls, Eigen::Index n) {
  for (const auto& b : balls) {
    if (b.center.size() != n) throw Error("ball dimension does not match objective");
    if (!(b.radius >= 0.0) || !std::isfinite(b.radius) || !b.center.allFinite()) {
      throw Error("ball radius must be finite and nonnegative");
    }
  }
}

/**
 * Maximizer of c^T v over the points lying on every sphere in `subset`.
 *
 * With w = v - a_0 the sphere equations reduce to the linear system
 * 2 (a_s - a_0)^T w = ||a_s - a_0||^2 + r_0^2 - r_s^2 plus ||w|| = r_0, so the
 * intersection is a sphere of radius rho inside an affine subspace. Returns
 * nullopt for an empty intersection or a degenerate (rank-deficient) subset.
 */
std::optional<Vec> sphere_candidate(const Vec& c, std::span<const Ball> balls,
                                    std::span<const std::size_t> subset) {
  const Ball& b0 = balls[subset[0]];
  const double c_norm = c.norm();
  if (subset.size() == 1) {
    return Vec(b0.center + (b0.radius / c_norm) * c);
  }
  const auto n = c.size();
  const auto rows = static_cast<Eigen::Index>(subset.size()) - 1;
  if (rows >= n + 1) return std::nullopt;
  Mat E(rows, n);
  Vec h(rows);
  for (Eigen::Index s = 0; s < rows; ++s) {
    const Ball& b = balls[subset[s + 1]];
    const Vec d = b.center - b0.center;
    E.row(s) = 2.0 * d.transpose();
    h[s] = d.squaredNorm() + b0.radius * b0.radius - b.radius * b.radius;
  }
  Eigen::JacobiSVD<Mat> svd(E, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec& sv = svd.singularValues();
  if (sv.size() == 0 || sv.minCoeff() <= 1e-12 * std::max(1.0, sv.maxCoeff())) {
    return std::nullopt;
  }
  const Vec w = svd.solve(h);
  if ((E * w - h).norm() > 1e-9 * (1.0 + h.norm())) return std::nullopt;

  const double r0 = b0.radius;
  const double rho_sq = r0 * r0 - w.squaredNorm();
  if (rho_sq < -1e-12 * (1.0 + r0 * r0)) return std::nullopt;
  const double rho = std::sqrt(std::max(0.0, rho_sq));

  // Component of c orthogonal to the row space of E.
  const Mat& V = svd.matrixV();
  const Mat row_basis = V.leftCols(rows);
  Vec c_free = c - row_basis * (row_basis.transpose() * c);
  const double free_norm = c_free.norm();
  Vec v = b0.center + w;
  if (rho == 0.0) return v;
  if (free_norm <= 1e-14 * c_norm) {
    // c^T v is constant on the intersection sphere; any point will do.
    if (rows < n) v += rho * V.col(rows);
    return v;
  }
  v += (rho / free_norm) * c_free;
  return v;
}

bool feasible_for(const Vec& v, std::span<const Ball> balls, std::span<const std::size_t> set,
                  double tol) {
  for (auto j : set) {
    if (violation(balls[j], v) > tol) return false;
  }
  return true;
}

struct Restricted {
  Vec point;
  std::vector<std::size_t> basis;
  double value;
};

/// Exact optimum over the balls in `working`, enumerating candidate subsets.
/// When `must` is set, only subsets containing it are tried.
std::optional<Restricted> solve_restricted(const Vec& c, std::span<const Ball> balls,
                                           const std::vector<std::size_t>& working,
                                           std::optional<std::size_t> must) {
  const auto n = static_cast<std::size_t>(c.size());
  const std::size_t k = working.size();
  std::optional<Restricted> best;
  std::vector<std::size_t> subset;
  for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
    const auto size = static_cast<std::size_t>(std::popcount(mask));
    if (size > n) continue;
    subset.clear();
    bool has_must = !must.has_value();
    for (std::size_t b = 0; b < k; ++b) {
      if (mask & (1u << b)) {
        subset.push_back(working[b]);
        if (must && working[b] == *must) has_must = true;
      }
    }
    if (!has_must) continue;
    if (must) {
      // Put the required ball first so its radius anchors the candidate.
      auto it = std::find(subset.begin(), subset.end(), *must);
      std::iter_swap(subset.begin(), it);
    }
    auto cand = sphere_candidate(c, balls, subset);
    if (!cand || !feasible_for(*cand, balls, working, 1e-9)) continue;
    const double value = c.dot(*cand);
    if (!best || value > best->value) best = Restricted{std::move(*cand), subset, value};
  }
  return best;
}

/// Nonnegative least squares for c = G mu by enumerating column subsets (G has few columns).
Vec small_nnls(const Mat& G, const Vec& c, double* residual) {
  const auto k = G.cols();
  Vec best_mu = Vec::Zero(k);
  double best_res = c.norm();
  for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
    std::vector<Eigen::Index> cols;
    for (Eigen::Index b = 0; b < k; ++b)
      if (mask & (1u << b)) cols.push_back(b);
    Mat sub(G.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t t = 0; t < cols.size(); ++t) sub.col(t) = G.col(cols[t]);
    const Vec mu = sub.colPivHouseholderQr().solve(c);
    if ((mu.array() < 0.0).any()) continue;
    const double res = (c - sub * mu).norm();
    if (res < best_res) {
      best_res = res;
      best_mu.setZero();
      for (std::size_t t = 0; t < cols.size(); ++t) best_mu[cols[t]] = mu[t];
    }
  }
  *residual = best_res;
  return best_mu;
}

}  // namespace

bool pairwise_separated(std::span<const Ball> balls, double tol) {
  for (std::size_t i = 0; i < balls.size(); ++i) {
    for (std::size_t j = i + 1; j < balls.size(); ++j) {
      if ((balls[i].center - balls[j].center).norm() > balls[i].radius + balls[j].radius + tol) {
        return true;
      }
    }
  }
  return false;
}

double kkt_residual(const Vec& c, std::span<const Ball> balls, const Vec& point,
                    std::span<const std::size_t> active, Vec* multipliers) {
  // Subset enumeration is exponential; more than 8 active balls only arises
  // in heavily degenerate instances, where the first 8 are used.
  const auto k = static_cast<Eigen::Index>(std::min<std::size_t>(active.size(), 8));
  Mat G(c.size(), k);
  for (Eigen::Index t = 0; t < k; ++t) G.col(t) = 2.0 * (point - balls[active[t]].center);
  double res = c.norm();
  Vec mu = k > 0 ? small_nnls(G, c, &res) : Vec();
  if (multipliers) {
    *multipliers = Vec::Zero(static_cast<Eigen::Index>(active.size()));
    multipliers->head(k) = mu;
  }
  return res / (1.0 + c.norm());
}

QclpResult max_linear(const Vec& c, std::span<const Ball> balls) {
  QclpResult out;
  if (balls.empty()) {
    out.status = QclpStatus::Unbounded;
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }
  const auto n = c.size();
  if (n == 0 || !c.allFinite()) throw Error("objective must be a finite nonempty vector");
  validate(balls, n);

  if (c.norm() == 0.0) {
    // Any feasible point is optimal; locate one with a nonzero objective.
    QclpResult probe = max_linear(Vec::Unit(n, 0), balls);
    if (probe.status != QclpStatus::Optimal) return probe;
    probe.value = 0.0;
    probe.kkt_residual = 0.0;
    probe.multipliers = Vec::Zero(static_cast<Eigen::Index>(probe.active_set.size()));
    return probe;
  }

  const double c_norm = c.norm();
  std::size_t start = 0;
  double start_value = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < balls.size(); ++j) {
    const double v = c.dot(balls[j].center) + c_norm * balls[j].radius;
    if (v < start_value) {
      start_value = v;
      start = j;
    }
  }

  // Cheap early exit: a ball separated from the starting one. Separations
  // elsewhere are caught by the restricted solves below.
  for (std::size_t j = 0; j < balls.size(); ++j) {
    if ((balls[j].center - balls[start].center).norm() >
        balls[j].radius + balls[start].radius + kFeasibilityTol) {
      out.status = QclpStatus::Infeasible;
      out.active_set = {start, j};
      return out;
    }
  }

  std::vector<std::size_t> basis{start};
  Vec point = balls[start].center + (balls[start].radius / c_norm) * c;
  double value = c.dot(point);
  bool converged = false;
  for (int it = 0; it < kMaxIterations; ++it) {
    std::size_t worst = 0;
    double worst_violation = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < balls.size(); ++j) {
      const double viol = violation(balls[j], point);
      if (viol > worst_violation) {
        worst_violation = viol;
        worst = j;
      }
    }
    if (worst_violation <= kFeasibilityTol) {
      converged = true;
      break;
    }
    std::vector<std::size_t> working = basis;
    working.push_back(worst);
    auto next = solve_restricted(c, balls, working, worst);
    if (!next) next = solve_restricted(c, balls, working, std::nullopt);
    if (!next) {
      // No candidate over the working set: its intersection is empty.
      out.status = QclpStatus::Infeasible;
      out.active_set = working;
      return out;
    }
    if (next->value >= value && it > 0 && next->value - value > 1e-12 * (1.0 + std::abs(value))) {
      // The restricted optimum must not increase; treat as numerical stagnation.
      break;
    }
    point = std::move(next->point);
    value = next->value;
    basis = std::move(next->basis);
  }

  out.status = QclpStatus::Optimal;
  out.value = value;
  out.argpoint = point;
  // Without convergence the last restricted value is still an upper bound
  // on the maximum, since it optimizes over a superset of the feasible set.
  for (std::size_t j = 0; j < balls.size(); ++j) {
    if (std::abs(violation(balls[j], point)) <= 1e-7 * (1.0 + balls[j].radius)) {
      out.active_set.push_back(j);
    }
  }
  if (out.active_set.empty()) out.active_set = basis;
  out.kkt_residual = kkt_residual(c, balls, point, out.active_set, &out.multipliers);
  if (!converged) out.kkt_residual = std::max(out.kkt_residual, 1.0);
  return out;
}

QclpResult min_linear(const Vec& c, std::span<const Ball> balls) {
  QclpResult r = max_linear(-c, balls);
  if (r.status == QclpStatus::Optimal) {
    r.value = -r.value;
  } else if (r.status == QclpStatus::Unbounded) {
    r.value = -r.value;
  }
  return r;
}

// ---------------------------------------------------------------------------

double max_quadratic_on_ball(const Mat& P, const Ball& ball, const Vec& shift) {
  const Vec a = ball.center - shift;
  const double r = ball.radius;
  if (r == 0.0) return a.dot(P * a);

  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (P + P.transpose()));
  const Vec& lam = es.eigenvalues();  // ascending
  const Vec b = es.eigenvectors().transpose() * a;
  const auto n = lam.size();
  const double lmax = lam[n - 1];
  if (lmax <= 0.0) return a.dot(P * a);

  const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
  const double tie = 1e-12 * scale;
  // Eigen-directions sharing the top eigenvalue.
  double top_weight = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (lmax - lam[i] <= tie) top_weight += (lam[i] * b[i]) * (lam[i] * b[i]);
  }

  auto phi = [&](double mu) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = lam[i] * b[i] / (mu - lam[i]);
      s += t * t;
    }
    return s;
  };
  // Objective at the stationary step t_i = lam_i b_i / (mu - lam_i).
  auto value_at = [&](double mu) {
    double v = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double z = b[i] * mu / (mu - lam[i]);
      v += lam[i] * z * z;
    }
    return v;
  };

  const double r_sq = r * r;
  if (top_weight <= 1e-30 * scale * scale * (1.0 + a.squaredNorm())) {
    // Hard case: the center has no component along the top eigenspace. If the
    // stationary step at mu = lmax is shorter than r, the rest of the step
    // goes along a top eigenvector.
    double rest = 0.0;
    double v = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (lmax - lam[i] <= tie) continue;
      const double t = lam[i] * b[i] / (lmax - lam[i]);
      rest += t * t;
      const double z = b[i] + t;
      v += lam[i] * z * z;
    }
    if (rest <= r_sq) return v + lmax * (r_sq - rest);
  }

  // phi is decreasing on (lmax, inf); bracket the root of phi(mu) = r^2.
  const double lam_b_norm = (lam.array() * b.array()).matrix().norm();
  double lo = lmax;
  double hi = lmax + lam_b_norm / r + tie;
  while (phi(hi) > r_sq) hi = lmax + 2.0 * (hi - lmax);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (phi(mid) > r_sq) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  // The two bracket ends differ by rounding only; keep the larger value.
  const double at_hi = value_at(hi);
  return lo > lmax ? std::max(value_at(lo), at_hi) : at_hi;
}

QuadraticBound max_quadratic_bound(const Mat& P, std::span<const Ball> balls, const Vec& shift) {
  QuadraticBound out;
  if (balls.empty()) {
    out.status = QclpStatus::Unbounded;
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }
  validate(balls, P.rows());
  if (pairwise_separated(balls)) {
    out.status = QclpStatus::Infeasible;
    return out;
  }
  out.status = QclpStatus::Optimal;
  out.value = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < balls.size(); ++j) {
    const double v = max_quadratic_on_ball(P, balls[j], shift);
    if (v < out.value) {
      out.value = v;
      out.tightest_ball = j;
    }
  }
  return out;
}

QuadraticBound max_quadratic_bound(const Mat& P, std::span<const Ball> balls) {
  return max_quadratic_bound(P, balls, Vec::Zero(P.rows()));
}

std::vector<Ball> inflated(std::span<const Ball> balls, double slack) {
  std::vector<Ball> out(balls.begin(), balls.end());
  for (auto& b : out) b.radius += slack;
  return out;
}

double feasibility_slack(std::span<const Ball> balls) {
  if (balls.empty()) return 0.0;
  validate(balls, balls.front().center.size());
  const auto r = max_linear(Vec::Zero(balls.front().center.size()), balls);
  if (r.status == QclpStatus::Optimal) return 0.0;
  return feasibility_slack(balls, r.active_set);
}

double feasibility_slack(std::span<const Ball> balls,
                         std::span<const std::size_t> infeasible_subset) {
  if (balls.empty()) return 0.0;
  const int n = static_cast<int>(balls.front().center.size());
  validate(balls, n);
  for (std::size_t j : infeasible_subset) {
    if (j >= balls.size()) throw Error("infeasible subset index out of range");
  }
  const Vec probe = Vec::Zero(n);

  // Half the widest gap within the subset is a lower bound on the slack,
  // and the touching point of that pair is a first candidate.
  double lo = 0.0;
  std::vector<std::size_t> work{infeasible_subset.empty() ? 0 : infeasible_subset.front()};
  Vec point = balls[work.front()].center;
  for (std::size_t p = 0; p < infeasible_subset.size(); ++p) {
    for (std::size_t q = p + 1; q < infeasible_subset.size(); ++q) {
      const Ball& a = balls[infeasible_subset[p]];
      const Ball& b = balls[infeasible_subset[q]];
      const double dist = (b.center - a.center).norm();
      const double gap = 0.5 * (dist - a.radius - b.radius);
      if (gap > lo) {
        lo = gap;
        work = {infeasible_subset[p], infeasible_subset[q]};
        point = a.center + (a.radius + gap) / dist * (b.center - a.center);
      }
    }
  }

  double largest = 0.0;
  for (const auto& b : balls) largest = std::max(largest, b.radius);
  // Any slack above the minimum is sound; stop once the excess is a
  // negligible fraction of the ball sizes.
  const double tol = 1e-6 * (largest + lo) + 2.0 * kFeasibilityTol;
  auto certified = [](double g) { return std::max(g, 0.0) * (1.0 + 1e-12) + kFeasibilityTol; };

  // The optimum is pinned by at most n + 1 balls. Solve on a small working
  // set by bisection, then add the ball the candidate violates most. Every
  // candidate point v certifies the slack max_j ||v - a_j|| - r_j.
  std::vector<Ball> subset, grown;
  for (std::size_t round = 0; round < balls.size(); ++round) {
    double g = -std::numeric_limits<double>::infinity();
    std::size_t worst = 0;
    for (std::size_t j = 0; j < balls.size(); ++j) {
      const double e = (point - balls[j].center).norm() - balls[j].radius;
      if (e > g) {
        g = e;
        worst = j;
      }
    }
    if (g <= lo + tol || std::find(work.begin(), work.end(), worst) != work.end()) {
      return certified(g);
    }
    work.push_back(worst);

    subset.clear();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t j : work) {
      subset.push_back(balls[j]);
      hi = std::max(hi, (point - balls[j].center).norm() - balls[j].radius);
    }
    grown = subset;
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
      const double mid = 0.5 * (lo + hi);
      for (std::size_t j = 0; j < subset.size(); ++j) grown[j].radius = subset[j].radius + mid;
      const auto r = max_linear(probe, grown);
      if (r.status == QclpStatus::Optimal) {
        hi = mid;
        point = r.argpoint;
      } else {
        lo = mid;
      }
    }
  }
  // Not reached in practice: the working set has grown to every ball.
  double g = -std::numeric_limits<double>::infinity();
  for (const auto& b : balls) g = std::max(g, (point - b.center).norm() - b.radius);
  return certified(g);
}

ElasticResult elastic_max_linear(const Vec& c, std::span<const Ball> balls) {
  ElasticResult out{max_linear(c, balls), 0.0};
  if (out.result.status != QclpStatus::Infeasible) return out;
  const double base = feasibility_slack(balls, out.result.active_set);
  double scale = 0.0;
  for (const auto& b : balls) scale = std::max(scale, b.radius);
  double nudge = 1e-9 * (scale + base) + kFeasibilityTol;
  auto grown = inflated(balls, 0.0);
  for (int attempt = 0; attempt < 40; ++attempt) {
    out.slack = attempt == 0 ? base : base + nudge;
    for (std::size_t j = 0; j < balls.size(); ++j) grown[j].radius = balls[j].radius + out.slack;
    out.result = max_linear(c, grown);
    if (out.result.status == QclpStatus::Optimal) return out;
    if (attempt > 0) nudge *= 2.0;
  }
  return out;
}

ElasticResult elastic_min_linear(const Vec& c, std::span<const Ball> balls) {
  ElasticResult out = elastic_max_linear(-c, balls);
  out.result.value = -out.result.value;
  return out;
}

std::string dump_instance(const Vec& c, std::span<const Ball> balls) {
  nlohmann::json j;
  j["c"] = std::vector<double>(c.data(), c.data() + c.size());
  auto& arr = j["balls"] = nlohmann::json::array();
  for (const auto& b : balls) {
    arr.push_back({{"center", std::vector<double>(b.center.data(), b.center.data() + b.center.size())},
                   {"radius", b.radius}});
  }
  return j.dump(2);
}

}  // namespace etatest
