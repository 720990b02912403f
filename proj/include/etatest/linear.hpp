#pragma once

#include <optional>

#include "etatest/dataset.hpp"

namespace etatest {

/// Thrown when the stacked data matrix lacks full row rank.
class RankDeficient : public Error {
 public:
  using Error::Error;
};

/// Column-stacked data matrices. Y holds X_dot or X' depending on time_kind.
struct LinearData {
  Mat X;
  Mat U;
  Mat Y;
  TimeKind time_kind = TimeKind::Continuous;

  static LinearData from(const Dataset& data);
  /// Z = [X; U]
  Mat stacked() const;
};

enum class Definiteness {
  NegativeDefinite,
  NegativeSemidefinite,
  Indefinite,
  PositiveSemidefinite,
  PositiveDefinite,
};
std::string_view to_string(Definiteness d);

/// Absolute eigenvalue tolerance for the semidefinite cases.
inline constexpr double kDefinitenessTol = 1e-10;

/// Classifies the symmetric part of M.
Definiteness definiteness(const Mat& M, Vec* eigenvalues = nullptr);

struct DissipationReport {
  Mat Q;
  Vec eigenvalues;  // of (Q + Q^T)/2, ascending
  /// Absent when the data are not reproduced by a linear model (residual > 1e-6).
  std::optional<Definiteness> verdict;
  Mat AB;  // identified [A B]
  double representation_residual = 0.0;  // ||Y - [A B] Z||_F
};

inline constexpr double kRepresentationTol = 1e-6;

/// Right inverse Z^T (Z Z^T)^-1. Throws RankDeficient when
/// sigma_min(Z) <= 1e-10 sigma_max(Z) or Z has fewer columns than rows.
Mat right_inverse(const Mat& Z);

/// [A B] = Y Z^+.
Mat identify(const LinearData& data);

/// Q = P (A + B K) + (A + B K)^T P with [A B] identified from data.
DissipationReport continuous_dissipation(const LinearData& data, const Mat& K, const Mat& P);

/// Q = (A + B K)^T P (A + B K) - P with [A B] identified from data.
DissipationReport discrete_dissipation(const LinearData& data, const Mat& K, const Mat& P);

struct SpectralReport {
  Mat A;
  double spectral_radius = 0.0;
  bool stable = false;
};

/// Autonomous discrete system x' = A x with A = X' X^+.
SpectralReport autonomous_spectral(const Mat& X, const Mat& X_next);

}  // namespace etatest
