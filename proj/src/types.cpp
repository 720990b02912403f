#include "etatest/types.hpp"

#include <cmath>
#include <string>

namespace etatest {

std::string_view to_string(TimeKind kind) {
  return kind == TimeKind::Continuous ? "continuous" : "discrete";
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Stable: return "Stable";
    case Outcome::Unstable: return "Unstable";
    case Outcome::Indeterminate: return "Indeterminate";
    case Outcome::NearCritical: return "NearCritical";
  }
  return "Indeterminate";
}

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::Stability: return "stability";
    case Mode::Instability: return "instability";
    case Mode::Both: return "both";
    case Mode::Discrete: return "discrete";
  }
  return "stability";
}

TimeKind parse_time_kind(std::string_view text) {
  if (text == "continuous") return TimeKind::Continuous;
  if (text == "discrete") return TimeKind::Discrete;
  throw Error("unknown time kind '" + std::string(text) + "'");
}

Outcome parse_outcome(std::string_view text) {
  for (auto o : {Outcome::Stable, Outcome::Unstable, Outcome::Indeterminate, Outcome::NearCritical})
    if (to_string(o) == text) return o;
  throw Error("unknown verdict '" + std::string(text) + "'");
}

Mode parse_mode(std::string_view text) {
  for (auto m : {Mode::Stability, Mode::Instability, Mode::Both, Mode::Discrete})
    if (to_string(m) == text) return m;
  throw Error("unknown mode '" + std::string(text) + "'");
}

double diagonal(const Bounds& bounds) {
  double sq = 0.0;
  for (const auto& b : bounds) sq += b.width() * b.width();
  return std::sqrt(sq);
}

}  // namespace etatest
