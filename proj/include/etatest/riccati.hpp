#pragma once

#include "etatest/types.hpp"

namespace etatest {

/// Thrown when Newton-Kleinman fails to reach the requested residual.
class CareError : public Error {
 public:
  CareError(const std::string& what, double residual) : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

struct CareSolution {
  Mat P;
  double residual = 0.0;  // Frobenius norm of the Riccati residual
  int iterations = 0;
};

/**
 * Stabilizing solution of A^T P + P A - P B R^-1 B^T P + Q = 0.
 *
 * Newton-Kleinman iteration; each step solves a Lyapunov equation through its
 * Kronecker form. The initial gain is zero when A is already Hurwitz and is
 * otherwise taken from a shifted controllability Gramian, which stabilizes
 * any controllable pair.
 */
CareSolution care_solve(const Mat& A, const Mat& B, const Mat& Q, const Mat& R,
                        double tol = 1e-10, int max_iter = 100);

double care_residual(const Mat& A, const Mat& B, const Mat& Q, const Mat& R, const Mat& P);

/// Solves A^T X + X A + Q = 0 (continuous Lyapunov equation), symmetrized.
Mat lyapunov_solve(const Mat& A, const Mat& Q);

/// Solves A^T X A - X + Q = 0 (discrete Lyapunov equation), symmetrized.
Mat discrete_lyapunov_solve(const Mat& A, const Mat& Q);

bool is_hurwitz(const Mat& A, double tol = 1e-10);
double spectral_abscissa(const Mat& A);
double spectral_radius(const Mat& A);

}  // namespace etatest
