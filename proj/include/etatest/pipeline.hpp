#pragma once

#include <cstdint>
#include <optional>

#include "etatest/dataset.hpp"
#include "etatest/lipschitz.hpp"
#include "etatest/neighbor_index.hpp"
#include "etatest/systems.hpp"
#include "etatest/verify.hpp"

namespace etatest {

/// Data-collection settings for an experiment.
struct CollectParams {
  std::size_t count = 10000;
  std::uint64_t seed = 0;
  double noise_amp = 0.01;
};

/// Collects an experiment's dataset with its verification policy plus noise.
Dataset collect_experiment(const Experiment& ex, const CollectParams& params);

struct PipelineParams {
  double delta = 0.1;
  double lambda = 1.0;
  std::optional<Mode> mode;              // experiment default when absent
  std::optional<double> epsilon_critical;  // experiment default when absent
  bool fail_fast = false;
  int threads = 0;
  bool with_truth = true;  // attach model-based dV/dt to every report
  bool restore_feasibility = true;
};

struct PipelineResult {
  LipschitzField field;
  Verdict verdict;
  double lipschitz_ms = 0.0;
  double verify_ms = 0.0;
};

/// Lipschitz estimation followed by the eta-test on an existing dataset.
/// The index must have been built over `data`.
PipelineResult run_pipeline(const Experiment& ex, const Dataset& data, const NeighborIndex& index,
                            const PipelineParams& params);

/// Same, building the index with cell size delta.
PipelineResult run_pipeline(const Experiment& ex, const Dataset& data,
                            const PipelineParams& params);

/// CLI exit code contract: 0 expected verdict, 2 Indeterminate, 3 contrary verdict.
int exit_code_for(Outcome got, Outcome expected);

}  // namespace etatest
