#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oracle {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vec uniform_vec(std::mt19937_64& rng, int n, double lo, double hi) {
  Vec v(n);
  for (int k = 0; k < n; ++k) v[k] = uniform(rng, lo, hi);
  return v;
}

Vec unit_vec(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Vec v(n);
  do {
    for (int k = 0; k < n; ++k) v[k] = g(rng);
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

LipschitzOptimum lipschitz_enumeration(std::span<const etatest::LipschitzConstraint> cons,
                                       double lambda) {
  std::vector<std::pair<double, double>> cand{{0.0, 0.0}};
  for (const auto& c : cons) {
    if (c.dy <= 0.0) continue;
    // Minimizer of lambda a^2 + b^2 on a dx + b du = dy.
    const double den = c.dx * c.dx / lambda + c.du * c.du;
    if (den > 0.0) cand.emplace_back(c.dy * c.dx / lambda / den, c.dy * c.du / den);
    if (c.dx > 0.0) cand.emplace_back(c.dy / c.dx, 0.0);
    if (c.du > 0.0) cand.emplace_back(0.0, c.dy / c.du);
  }
  for (std::size_t p = 0; p < cons.size(); ++p) {
    for (std::size_t q = p + 1; q < cons.size(); ++q) {
      const double det = cons[p].dx * cons[q].du - cons[q].dx * cons[p].du;
      if (std::abs(det) < 1e-300) continue;
      cand.emplace_back((cons[p].dy * cons[q].du - cons[q].dy * cons[p].du) / det,
                        (cons[p].dx * cons[q].dy - cons[q].dx * cons[p].dy) / det);
    }
  }
  auto feasible = [&](double a, double b) {
    if (a < 0.0 || b < 0.0) return false;
    for (const auto& c : cons) {
      const double scale = 1.0 + std::abs(c.dy);
      if (c.dy > a * c.dx + b * c.du + 1e-11 * scale) return false;
    }
    return true;
  };
  LipschitzOptimum best;
  best.objective = std::numeric_limits<double>::infinity();
  for (auto [a, b] : cand) {
    if (!feasible(a, b)) continue;
    const double obj = lambda * a * a + b * b;
    if (obj < best.objective) best = {a, b, obj};
  }
  return best;
}

namespace {

bool inside(std::span<const Ball> balls, const Vec& v, double tol) {
  for (const auto& b : balls) {
    if ((v - b.center).norm() > b.radius + tol) return false;
  }
  return true;
}

// Best feasible c^T v on a regular grid of `per_axis` points per dimension.
double grid_pass(const Vec& c, std::span<const Ball> balls, const Vec& lo, const Vec& hi,
                 int per_axis, Vec& best_point) {
  const int n = static_cast<int>(lo.size());
  double best = -std::numeric_limits<double>::infinity();
  std::vector<int> idx(n, 0);
  Vec v(n);
  while (true) {
    for (int k = 0; k < n; ++k) {
      v[k] = lo[k] + (hi[k] - lo[k]) * idx[k] / double(per_axis - 1);
    }
    if (inside(balls, v, 0.0)) {
      const double val = c.dot(v);
      if (val > best) {
        best = val;
        best_point = v;
      }
    }
    int k = 0;
    while (k < n && ++idx[k] == per_axis) idx[k++] = 0;
    if (k == n) break;
  }
  return best;
}

}  // namespace

double qclp_grid(const Vec& c, std::span<const Ball> balls) {
  const int n = static_cast<int>(c.size());
  int per_axis = n <= 2 ? 201 : (n == 3 ? 41 : 17);
  // Every feasible point lies in the intersection of the per-ball boxes.
  Vec lo = Vec::Constant(n, -std::numeric_limits<double>::infinity());
  Vec hi = -lo;
  for (const auto& b : balls) {
    lo = lo.cwiseMax((b.center.array() - b.radius).matrix());
    hi = hi.cwiseMin((b.center.array() + b.radius).matrix());
  }
  if ((hi.array() < lo.array()).any()) return -std::numeric_limits<double>::infinity();
  Vec point = lo;
  double value = grid_pass(c, balls, lo, hi, per_axis, point);
  // A thin intersection can fall between grid points; refine until one hits.
  while (!std::isfinite(value) && per_axis < (n <= 3 ? 801 : 65)) {
    per_axis = 2 * per_axis - 1;
    value = grid_pass(c, balls, lo, hi, per_axis, point);
  }
  if (!std::isfinite(value)) return value;
  Vec step = (hi - lo) / double(per_axis - 1);
  for (int level = 0; level < 80; ++level) {
    // Re-grid a few coarse steps around the incumbent, at half the step.
    const Vec new_lo = point - 4.0 * step;
    const Vec new_hi = point + 4.0 * step;
    Vec candidate = point;
    const double refined = grid_pass(c, balls, new_lo, new_hi, 17, candidate);
    step = (new_hi - new_lo) / 16.0;
    if (refined > value) {
      value = refined;
      point = candidate;
    }
    if (step.maxCoeff() < 1e-7) break;
  }
  return value;
}

std::vector<Ball> feasible_balls(std::mt19937_64& rng, int n, int count, double margin) {
  const Vec p = uniform_vec(rng, n, -1.0, 1.0);
  std::vector<Ball> balls;
  for (int j = 0; j < count; ++j) {
    Ball b;
    b.center = p + uniform(rng, 0.2, 1.5) * unit_vec(rng, n);
    b.radius = (b.center - p).norm() + margin + uniform(rng, 0.0, 0.3);
    balls.push_back(b);
  }
  return balls;
}

double sphere_max(const Mat& P, const Ball& ball, const Vec& shift, std::mt19937_64& rng,
                  int samples) {
  double best = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const Vec v = ball.center + ball.radius * unit_vec(rng, static_cast<int>(ball.center.size())) -
                  shift;
    best = std::max(best, v.dot(P * v));
  }
  return best;
}

std::vector<Vec> sample_intersection(std::span<const Ball> balls, std::mt19937_64& rng,
                                     int wanted, int max_tries) {
  std::vector<Vec> out;
  if (balls.empty()) return out;
  const auto smallest = std::min_element(balls.begin(), balls.end(),
                                         [](const Ball& a, const Ball& b) { return a.radius < b.radius; });
  const int n = static_cast<int>(smallest->center.size());
  for (int t = 0; t < max_tries && static_cast<int>(out.size()) < wanted; ++t) {
    const double r = smallest->radius * std::pow(uniform(rng, 0.0, 1.0), 1.0 / n);
    const Vec v = smallest->center + r * unit_vec(rng, n);
    if (inside(balls, v, 0.0)) out.push_back(v);
  }
  return out;
}

std::vector<std::size_t> scan_neighbors(std::span<const double> points, int dims,
                                        std::span<const double> query, double delta) {
  std::vector<std::size_t> out;
  const std::size_t count = points.size() / dims;
  for (std::size_t j = 0; j < count; ++j) {
    double sq = 0.0;
    for (int k = 0; k < dims; ++k) {
      const double d = points[j * dims + k] - query[k];
      sq += d * d;
    }
    if (std::sqrt(sq) <= delta) out.push_back(j);
  }
  return out;
}

std::vector<double> characteristic_polynomial(const Mat& A) {
  const auto n = A.rows();
  std::vector<double> coeff(n + 1, 0.0);
  coeff[0] = 1.0;
  Mat M = Mat::Zero(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    M = A * M + coeff[k - 1] * Mat::Identity(n, n);
    coeff[k] = -(A * M).trace() / double(k);
  }
  return coeff;
}

std::vector<std::complex<double>> polynomial_roots(const std::vector<double>& monic) {
  const int deg = static_cast<int>(monic.size()) - 1;
  std::vector<std::complex<double>> z(deg);
  const std::complex<double> seed(0.4, 0.9);
  for (int k = 0; k < deg; ++k) z[k] = std::pow(seed, k);
  auto eval = [&](std::complex<double> x) {
    std::complex<double> acc = 0.0;
    for (double a : monic) acc = acc * x + a;
    return acc;
  };
  for (int it = 0; it < 2000; ++it) {
    double moved = 0.0;
    for (int k = 0; k < deg; ++k) {
      std::complex<double> den = 1.0;
      for (int j = 0; j < deg; ++j) {
        if (j != k) den *= z[k] - z[j];
      }
      const auto step = eval(z[k]) / den;
      z[k] -= step;
      moved = std::max(moved, std::abs(step));
    }
    if (moved < 1e-15) break;
  }
  return z;
}

double spectral_radius_charpoly(const Mat& A) {
  double r = 0.0;
  for (auto z : polynomial_roots(characteristic_polynomial(A))) r = std::max(r, std::abs(z));
  return r;
}

double spectral_abscissa_charpoly(const Mat& A) {
  double r = -std::numeric_limits<double>::infinity();
  for (auto z : polynomial_roots(characteristic_polynomial(A))) r = std::max(r, z.real());
  return r;
}

double norm2_power(const Mat& A, int iterations) {
  const Mat G = A.transpose() * A;
  Vec v = Vec::Ones(G.cols());
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const Vec w = G * v;
    lambda = w.norm();
    if (lambda == 0.0) return 0.0;
    v = w / lambda;
  }
  return std::sqrt(lambda);
}

}  // namespace oracle
