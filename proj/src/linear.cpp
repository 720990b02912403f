#include "etatest/linear.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace etatest {

std::string_view to_string(Definiteness d) {
  switch (d) {
    case Definiteness::NegativeDefinite: return "NegativeDefinite";
    case Definiteness::NegativeSemidefinite: return "NegativeSemidefinite";
    case Definiteness::Indefinite: return "Indefinite";
    case Definiteness::PositiveSemidefinite: return "PositiveSemidefinite";
    case Definiteness::PositiveDefinite: return "PositiveDefinite";
  }
  return "Indefinite";
}

LinearData LinearData::from(const Dataset& data) {
  const auto N = static_cast<Eigen::Index>(data.size());
  LinearData out{Mat(data.n(), N), Mat(data.m(), N), Mat(data.n(), N), data.time_kind()};
  for (Eigen::Index i = 0; i < N; ++i) {
    out.X.col(i) = data.x(static_cast<std::size_t>(i));
    out.U.col(i) = data.u(static_cast<std::size_t>(i));
    out.Y.col(i) = data.y(static_cast<std::size_t>(i));
  }
  return out;
}

Mat LinearData::stacked() const {
  Mat Z(X.rows() + U.rows(), X.cols());
  Z << X, U;
  return Z;
}

Definiteness definiteness(const Mat& M, Vec* eigenvalues) {
  const Mat S = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
  const Vec& ev = es.eigenvalues();
  if (eigenvalues) *eigenvalues = ev;
  const double lo = ev.minCoeff();
  const double hi = ev.maxCoeff();
  if (hi < -kDefinitenessTol) return Definiteness::NegativeDefinite;
  if (lo > kDefinitenessTol) return Definiteness::PositiveDefinite;
  if (hi <= kDefinitenessTol) return Definiteness::NegativeSemidefinite;
  if (lo >= -kDefinitenessTol) return Definiteness::PositiveSemidefinite;
  return Definiteness::Indefinite;
}

Mat right_inverse(const Mat& Z) {
  if (Z.cols() < Z.rows()) {
    throw RankDeficient("data matrix has " + std::to_string(Z.cols()) + " columns, needs at least " +
                        std::to_string(Z.rows()));
  }
  Eigen::JacobiSVD<Mat> svd(Z);
  const Vec& sv = svd.singularValues();
  if (sv.size() == 0 || sv.minCoeff() <= 1e-10 * sv.maxCoeff()) {
    throw RankDeficient("data matrix is not of full row rank (sigma_min / sigma_max = " +
                        std::to_string(sv.size() ? sv.minCoeff() / sv.maxCoeff() : 0.0) + ")");
  }
  const Mat gram = Z * Z.transpose();
  const auto llt = gram.llt();
  if (llt.info() != Eigen::Success) throw RankDeficient("Z Z^T is not positive definite");
  return llt.solve(Z).transpose();
}

Mat identify(const LinearData& data) {
  if (data.Y.rows() != data.X.rows() || data.Y.cols() != data.X.cols() ||
      data.U.cols() != data.X.cols()) {
    throw Error("inconsistent data matrix shapes");
  }
  return data.Y * right_inverse(data.stacked());
}

namespace {

DissipationReport dissipation(const LinearData& data, const Mat& K, const Mat& P, bool discrete) {
  const auto n = data.X.rows();
  const auto m = data.U.rows();
  if (K.rows() != m || K.cols() != n) throw Error("gain K must be m x n");
  if (P.rows() != n || P.cols() != n) throw Error("P must be n x n");
  DissipationReport rep;
  rep.AB = identify(data);
  rep.representation_residual = (data.Y - rep.AB * data.stacked()).norm();
  Mat IK(n + m, n);
  IK << Mat::Identity(n, n), K;
  const Mat closed = rep.AB * IK;
  rep.Q = discrete ? Mat(closed.transpose() * P * closed - P)
                   : Mat(P * closed + closed.transpose() * P);
  const Definiteness d = definiteness(rep.Q, &rep.eigenvalues);
  if (rep.representation_residual <= kRepresentationTol) rep.verdict = d;
  return rep;
}

}  // namespace

DissipationReport continuous_dissipation(const LinearData& data, const Mat& K, const Mat& P) {
  if (data.time_kind != TimeKind::Continuous) throw Error("continuous criterion needs x_dot data");
  return dissipation(data, K, P, false);
}

DissipationReport discrete_dissipation(const LinearData& data, const Mat& K, const Mat& P) {
  if (data.time_kind != TimeKind::Discrete) throw Error("discrete criterion needs x' data");
  return dissipation(data, K, P, true);
}

SpectralReport autonomous_spectral(const Mat& X, const Mat& X_next) {
  if (X.rows() != X_next.rows() || X.cols() != X_next.cols()) {
    throw Error("X and X' must have the same shape");
  }
  SpectralReport rep;
  rep.A = X_next * right_inverse(X);
  Eigen::EigenSolver<Mat> es(rep.A, false);
  rep.spectral_radius = es.eigenvalues().cwiseAbs().maxCoeff();
  rep.stable = rep.spectral_radius < 1.0 - 1e-12;
  return rep;
}

}  // namespace etatest
