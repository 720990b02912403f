#pragma once

#include <filesystem>
#include <string>

#include "etatest/lipschitz.hpp"
#include "etatest/verify.hpp"

namespace etatest {

/// Fixed-width scientific text with 17 significant digits; round-trips exactly.
std::string format_real(double v);

/// Lipschitz field CSV `i,L_x,L_u,unconstrained_flag` plus manifest {delta, lambda}.
void save_lipschitz(const LipschitzField& field, const std::filesystem::path& csv);
LipschitzField load_lipschitz(const std::filesystem::path& csv);

/// Per-state CSV `i,x0..x{n-1},neighbors,eta_max,eta_min[,true_vdot]`; absent values are empty.
void save_reports(const Verdict& verdict, int n, const std::filesystem::path& csv);

struct RunSummary {
  Outcome verdict = Outcome::Indeterminate;
  VerdictCounts counts;
  double delta = 0.0;
  double lambda = 0.0;
  double epsilon_critical = 0.0;
  double runtime_ms = 0.0;
};

std::string summary_json(const RunSummary& summary);
void save_summary(const RunSummary& summary, const std::filesystem::path& json);

}  // namespace etatest
