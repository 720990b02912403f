#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace etatest {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class TimeKind { Continuous, Discrete };

/// Closed interval [lo, hi] of one state dimension.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const { return v >= lo && v <= hi; }
  double width() const { return hi - lo; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

using Bounds = std::vector<Interval>;

/// Overall classification of an eta-test run.
enum class Outcome { Stable, Unstable, Indeterminate, NearCritical };

/// Which optimization problems are solved per state.
enum class Mode { Stability, Instability, Both, Discrete };

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string_view to_string(TimeKind kind);
std::string_view to_string(Outcome outcome);
std::string_view to_string(Mode mode);

TimeKind parse_time_kind(std::string_view text);
Outcome parse_outcome(std::string_view text);
Mode parse_mode(std::string_view text);

/// Euclidean length of the bounds box diagonal.
double diagonal(const Bounds& bounds);

}  // namespace etatest
