#include "etatest/riccati.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

namespace etatest {

namespace {

Mat kron_sum_identity(const Mat& M) {
  // I (x) M + M (x) I, acting on column-major vec(X).
  const Eigen::Index n = M.rows();
  Mat K = Mat::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K.block(i * n, i * n, n, n) += M;
    for (Eigen::Index j = 0; j < n; ++j) {
      K.block(i * n, j * n, n, n).diagonal().array() += M(i, j);
    }
  }
  return K;
}

Mat unvec(const Vec& v, Eigen::Index n) {
  Mat X = Eigen::Map<const Mat>(v.data(), n, n);
  return 0.5 * (X + X.transpose());
}

}  // namespace

Mat lyapunov_solve(const Mat& A, const Mat& Q) {
  const Eigen::Index n = A.rows();
  const Mat At = A.transpose();
  const Mat K = kron_sum_identity(At);
  const Vec rhs = -Eigen::Map<const Vec>(Q.data(), n * n);
  return unvec(K.fullPivLu().solve(rhs), n);
}

Mat discrete_lyapunov_solve(const Mat& A, const Mat& Q) {
  const Eigen::Index n = A.rows();
  const Mat At = A.transpose();
  Mat K = Mat::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) K.block(i * n, j * n, n, n) = At(i, j) * At;
  K -= Mat::Identity(n * n, n * n);
  const Vec rhs = -Eigen::Map<const Vec>(Q.data(), n * n);
  return unvec(K.fullPivLu().solve(rhs), n);
}

double spectral_abscissa(const Mat& A) {
  Eigen::EigenSolver<Mat> es(A, false);
  return es.eigenvalues().real().maxCoeff();
}

double spectral_radius(const Mat& A) {
  Eigen::EigenSolver<Mat> es(A, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_hurwitz(const Mat& A, double tol) { return spectral_abscissa(A) < -tol; }

double care_residual(const Mat& A, const Mat& B, const Mat& Q, const Mat& R, const Mat& P) {
  const Mat res = A.transpose() * P + P * A - P * B * R.ldlt().solve(B.transpose() * P) + Q;
  return res.norm();
}

CareSolution care_solve(const Mat& A, const Mat& B, const Mat& Q, const Mat& R, double tol,
                        int max_iter) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n ||
      R.rows() != B.cols() || R.cols() != B.cols()) {
    throw Error("care_solve: inconsistent matrix shapes");
  }
  if (!(tol > 0.0)) throw Error("care_solve: tolerance must be positive");
  const auto R_ldlt = R.ldlt();

  // Stabilizing start, u = -K x.
  Mat K = Mat::Zero(B.cols(), n);
  if (!is_hurwitz(A)) {
    const double beta = A.cwiseAbs().colwise().sum().maxCoeff() + 1.0;
    const Mat shifted = -(A + beta * Mat::Identity(n, n));
    const Mat Z = lyapunov_solve(shifted.transpose(), 2.0 * B * B.transpose());
    K = B.transpose() * Z.inverse();
    if (!is_hurwitz(A - B * K)) {
      throw CareError("care_solve: could not find a stabilizing initial gain",
                      std::numeric_limits<double>::infinity());
    }
  }

  CareSolution best{Mat::Zero(n, n), std::numeric_limits<double>::infinity(), 0};
  int stalled = 0;
  for (int it = 1; it <= max_iter; ++it) {
    const Mat closed = A - B * K;
    const Mat P = lyapunov_solve(closed, Q + K.transpose() * R * K);
    K = R_ldlt.solve(B.transpose() * P);
    const double res = care_residual(A, B, Q, R, P);
    if (res < best.residual) {
      stalled = res > 0.99 * best.residual ? stalled + 1 : 0;
      best = {P, res, it};
    } else {
      ++stalled;
    }
    if (best.residual <= tol || stalled >= 3) break;
  }
  if (!(best.residual <= tol)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "care_solve: residual %.3e above tolerance %.1e after %d iterations",
                  best.residual, tol, best.iterations);
    throw CareError(buf, best.residual);
  }
  return best;
}

}  // namespace etatest
