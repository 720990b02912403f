#include "etatest/pipeline.hpp"

#include <chrono>

namespace etatest {

Dataset collect_experiment(const Experiment& ex, const CollectParams& params) {
  Dataset data = collect(ex.system, ex.policy, params.count, ex.bounds, params.noise_amp,
                         params.seed);
  data.meta().system = ex.name;
  return data;
}

PipelineResult run_pipeline(const Experiment& ex, const Dataset& data, const NeighborIndex& index,
                            const PipelineParams& params) {
  using Clock = std::chrono::steady_clock;
  auto ms = [](Clock::duration d) { return std::chrono::duration<double, std::milli>(d).count(); };

  PipelineResult out;
  const auto t0 = Clock::now();
  out.field = estimate_all(data, index, params.delta, params.lambda, params.threads);
  const auto t1 = Clock::now();

  VerifyOptions opts;
  opts.delta = params.delta;
  opts.mode = params.mode.value_or(ex.mode);
  opts.eq_tol = default_eq_tol(ex.bounds);
  opts.equilibrium = ex.system.equilibrium();
  opts.epsilon_critical = params.epsilon_critical.value_or(ex.epsilon_critical);
  opts.fail_fast = params.fail_fast;
  opts.threads = params.threads;
  opts.restore_feasibility = params.restore_feasibility;
  out.verdict = eta_test(data, index, ex.policy, ex.lyapunov, out.field, opts);
  const auto t2 = Clock::now();
  if (params.with_truth) attach_true_vdot(out.verdict, ex.system, ex.policy, ex.lyapunov);

  out.lipschitz_ms = ms(t1 - t0);
  out.verify_ms = ms(t2 - t1);
  return out;
}

PipelineResult run_pipeline(const Experiment& ex, const Dataset& data,
                            const PipelineParams& params) {
  const NeighborIndex index(data, params.delta);
  return run_pipeline(ex, data, index, params);
}

int exit_code_for(Outcome got, Outcome expected) {
  if (got == expected) return 0;
  if (got == Outcome::Indeterminate) return 2;
  return 3;
}

}  // namespace etatest
