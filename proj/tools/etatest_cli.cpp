// Command-line front end: collect datasets, run the eta-test, export grids
// for plotting, and check the data-driven linear criterion.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "etatest/dataset.hpp"
#include "etatest/grid.hpp"
#include "etatest/io.hpp"
#include "etatest/linear.hpp"
#include "etatest/pipeline.hpp"
#include "etatest/systems.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace etatest;

namespace {

struct RunConfig {
  std::string experiment = "osc-stable";
  std::string dataset;
  double delta = 0.1;
  double lambda = 1.0;
  std::optional<double> epsilon_critical;
  std::size_t n = 10000;
  std::uint64_t seed = 0;
  double noise_amp = 0.01;
  std::string mode;  // empty: experiment default
  bool fail_fast = false;
  bool no_restore = false;
  int threads = 0;
  std::string out = ".";
  std::string config;
  std::string field = "V";
  int resolution = 101;
  ExperimentOverrides overrides;
};

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error("malformed config " + path.string() + ": " + e.what());
  }
}

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed,
                    std::string_view where) {
  if (!obj.is_object()) throw Error(std::string(where) + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (auto name : allowed) known = known || key == name;
    if (!known) throw Error("unknown key '" + key + "' in " + std::string(where));
  }
}

template <class T>
void take(const json& obj, const char* key, T& target) {
  if (obj.contains(key)) target = obj.at(key).get<T>();
}

void apply_params(const json& params, RunConfig& cfg) {
  reject_unknown(params, {"pendulum", "vehicle", "pendulum_gain"}, "params");
  if (params.contains("pendulum")) {
    const json& p = params["pendulum"];
    reject_unknown(p, {"mass", "length", "gravity"}, "params.pendulum");
    PendulumParams pp;
    take(p, "mass", pp.mass);
    take(p, "length", pp.length);
    take(p, "gravity", pp.gravity);
    cfg.overrides.pendulum = pp;
  }
  if (params.contains("vehicle")) {
    const json& v = params["vehicle"];
    reject_unknown(v, {"k_f", "k_r", "l_f", "l_r", "mass", "i_z", "u_long"}, "params.vehicle");
    VehicleParams vp;
    take(v, "k_f", vp.k_f);
    take(v, "k_r", vp.k_r);
    take(v, "l_f", vp.l_f);
    take(v, "l_r", vp.l_r);
    take(v, "mass", vp.mass);
    take(v, "i_z", vp.i_z);
    take(v, "u_long", vp.u_long);
    cfg.overrides.vehicle = vp;
  }
  if (params.contains("pendulum_gain"))
    cfg.overrides.pendulum_gain = params["pendulum_gain"].get<double>();
}

// Config-file values fill only the options not given on the command line or
// through the environment.
void apply_config_file(const CLI::App& app, RunConfig& cfg) {
  if (cfg.config.empty()) return;
  const json doc = read_json_file(cfg.config);
  reject_unknown(doc,
                 {"experiment", "dataset", "delta", "lambda", "epsilon_critical", "n", "seed",
                  "noise_amp", "mode", "fail_fast", "no_restore", "threads", "out", "field", "resolution",
                  "params"},
                 "config");
  auto unset = [&](const char* flag) {
    const CLI::Option* opt = app.get_option_no_throw(flag);
    return opt == nullptr || opt->count() == 0;
  };
  try {
    if (unset("--experiment")) take(doc, "experiment", cfg.experiment);
    if (unset("--dataset")) take(doc, "dataset", cfg.dataset);
    if (unset("--delta")) take(doc, "delta", cfg.delta);
    if (unset("--lambda")) take(doc, "lambda", cfg.lambda);
    if (unset("--epsilon-critical") && doc.contains("epsilon_critical"))
      cfg.epsilon_critical = doc["epsilon_critical"].get<double>();
    if (unset("--n")) take(doc, "n", cfg.n);
    if (unset("--seed")) take(doc, "seed", cfg.seed);
    if (unset("--noise-amp")) take(doc, "noise_amp", cfg.noise_amp);
    if (unset("--mode")) take(doc, "mode", cfg.mode);
    if (unset("--fail-fast")) take(doc, "fail_fast", cfg.fail_fast);
    if (unset("--no-restore")) take(doc, "no_restore", cfg.no_restore);
    if (unset("--threads")) take(doc, "threads", cfg.threads);
    if (unset("--out")) take(doc, "out", cfg.out);
    if (unset("--field")) take(doc, "field", cfg.field);
    if (unset("--resolution")) take(doc, "resolution", cfg.resolution);
    if (doc.contains("params")) apply_params(doc["params"], cfg);
  } catch (const json::exception& e) {
    throw Error(std::string("config value has the wrong type: ") + e.what());
  }
}

void validate(const RunConfig& cfg) {
  if (!(cfg.delta > 0.0)) throw Error("--delta must be positive");
  if (!(cfg.lambda > 0.0)) throw Error("--lambda must be positive");
  if (cfg.epsilon_critical && !(*cfg.epsilon_critical >= 0.0))
    throw Error("--epsilon-critical must be non-negative");
  if (!(cfg.noise_amp >= 0.0)) throw Error("--noise-amp must be non-negative");
  if (cfg.threads < 0) throw Error("--threads must be non-negative");
  if (cfg.resolution < 2) throw Error("--resolution must be at least 2");
  if (!cfg.mode.empty()) parse_mode(cfg.mode);
}

// Experiment named on the command line, else the one recorded in the dataset.
Experiment resolve_experiment(const CLI::App& sub, const RunConfig& cfg,
                              const std::optional<Dataset>& data) {
  std::string name = cfg.experiment;
  const CLI::Option* opt = sub.get_option_no_throw("--experiment");
  const bool named = (opt != nullptr && opt->count() > 0) || !cfg.config.empty();
  if (!named && data && !data->meta().system.empty()) name = data->meta().system;
  return make_experiment(name, cfg.overrides);
}

Dataset obtain_dataset(const Experiment& ex, const std::optional<Dataset>& loaded,
                       const RunConfig& cfg) {
  if (loaded) return *loaded;
  return collect_experiment(ex, {cfg.n, cfg.seed, cfg.noise_amp});
}

std::optional<Dataset> maybe_load(const RunConfig& cfg) {
  if (cfg.dataset.empty()) return std::nullopt;
  return load(cfg.dataset);
}

PipelineParams pipeline_params(const RunConfig& cfg) {
  PipelineParams p;
  p.delta = cfg.delta;
  p.lambda = cfg.lambda;
  if (!cfg.mode.empty()) p.mode = parse_mode(cfg.mode);
  p.epsilon_critical = cfg.epsilon_critical;
  p.fail_fast = cfg.fail_fast;
  p.restore_feasibility = !cfg.no_restore;
  p.threads = cfg.threads;
  return p;
}

int cmd_collect(const CLI::App& sub, const RunConfig& cfg) {
  const Experiment ex = resolve_experiment(sub, cfg, std::nullopt);
  const Dataset data = collect_experiment(ex, {cfg.n, cfg.seed, cfg.noise_amp});
  fs::create_directories(cfg.out);
  const fs::path csv = fs::path(cfg.out) / "dataset.csv";
  save(data, csv);
  std::cout << "wrote " << data.size() << " samples to " << csv.string() << "\n";
  return 0;
}

int cmd_verify(const CLI::App& sub, const RunConfig& cfg) {
  const auto loaded = maybe_load(cfg);
  const Experiment ex = resolve_experiment(sub, cfg, loaded);
  const Dataset data = obtain_dataset(ex, loaded, cfg);

  const auto start = std::chrono::steady_clock::now();
  const PipelineResult run = run_pipeline(ex, data, pipeline_params(cfg));
  const double elapsed =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  const fs::path out(cfg.out);
  fs::create_directories(out);
  if (!loaded) save(data, out / "dataset.csv");
  save_lipschitz(run.field, out / "lipschitz.csv");
  save_reports(run.verdict, ex.system.n(), out / "reports.csv");

  RunSummary summary;
  summary.verdict = run.verdict.overall;
  summary.counts = run.verdict.counts;
  summary.delta = cfg.delta;
  summary.lambda = cfg.lambda;
  summary.epsilon_critical = run.verdict.epsilon_critical;
  summary.runtime_ms = elapsed;
  save_summary(summary, out / "summary.json");
  std::cout << summary_json(summary) << "\n";
  return exit_code_for(run.verdict.overall, ex.expected);
}

int cmd_export_grid(const CLI::App& sub, const RunConfig& cfg) {
  const GridField field = parse_grid_field(cfg.field);
  const auto loaded = maybe_load(cfg);
  const Experiment ex = resolve_experiment(sub, cfg, loaded);

  GridInputs in;
  in.experiment = &ex;
  in.delta = cfg.delta;
  in.threads = cfg.threads;
  std::optional<Dataset> data;
  std::optional<NeighborIndex> index;
  LipschitzField lip;
  const bool needs_data = field != GridField::V && field != GridField::TrueVdot;
  if (needs_data) {
    data = obtain_dataset(ex, loaded, cfg);
    index.emplace(*data, cfg.delta);
    lip = estimate_all(*data, *index, cfg.delta, cfg.lambda, cfg.threads);
    in.data = &*data;
    in.index = &*index;
    in.field = &lip;
  }
  const auto grid = export_grid(in, field, cfg.resolution);
  fs::create_directories(cfg.out);
  const fs::path csv = fs::path(cfg.out) / ("grid_" + std::string(to_string(field)) + ".csv");
  save_grid(grid, csv);
  std::cout << "wrote " << grid.size() << " grid points to " << csv.string() << "\n";
  return 0;
}

json matrix_json(const Mat& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(row);
  }
  return rows;
}

int cmd_linear_verify(const CLI::App& sub, const RunConfig& cfg) {
  const auto loaded = maybe_load(cfg);
  const Experiment ex = resolve_experiment(sub, cfg, loaded);
  const auto* gain = std::get_if<Policy::LinearFeedback>(&ex.policy.kind());
  const auto* quad = std::get_if<LyapunovFn::Quadratic>(&ex.lyapunov.kind());
  if (gain == nullptr || quad == nullptr)
    throw Error("linear-verify needs an experiment with linear feedback and quadratic V: " +
                ex.name);
  const Dataset data = obtain_dataset(ex, loaded, cfg);
  const LinearData ld = LinearData::from(data);
  const DissipationReport rep = ld.time_kind == TimeKind::Continuous
                                    ? continuous_dissipation(ld, gain->K, quad->P)
                                    : discrete_dissipation(ld, gain->K, quad->P);

  json doc;
  doc["experiment"] = ex.name;
  doc["Q"] = matrix_json(rep.Q);
  doc["eigenvalues"] = std::vector<double>(rep.eigenvalues.data(),
                                           rep.eigenvalues.data() + rep.eigenvalues.size());
  doc["verdict"] = rep.verdict ? json(std::string(to_string(*rep.verdict))) : json(nullptr);
  doc["AB"] = matrix_json(rep.AB);
  doc["representation_residual"] = rep.representation_residual;

  fs::create_directories(cfg.out);
  std::ofstream(fs::path(cfg.out) / "linear.json") << doc.dump(2) << "\n";
  std::cout << doc.dump(2) << "\n";
  if (!rep.verdict) return 2;
  const bool negative = *rep.verdict == Definiteness::NegativeDefinite;
  const bool wanted = ex.expected == Outcome::Stable;
  return negative == wanted ? 0 : 3;
}

void add_common(CLI::App& sub, RunConfig& cfg) {
  sub.add_option("--experiment", cfg.experiment, "Experiment name")->envname("ETATEST_EXPERIMENT");
  sub.add_option("--dataset", cfg.dataset, "Existing dataset CSV")->envname("ETATEST_DATASET");
  sub.add_option("--n", cfg.n, "Number of samples to collect")->envname("ETATEST_N");
  sub.add_option("--seed", cfg.seed, "Sampling seed")->envname("ETATEST_SEED");
  sub.add_option("--noise-amp", cfg.noise_amp, "Uniform action-noise amplitude")
      ->envname("ETATEST_NOISE_AMP");
  sub.add_option("--out", cfg.out, "Output directory")->envname("ETATEST_OUT");
  sub.add_option("--config", cfg.config, "JSON config file")->envname("ETATEST_CONFIG");
  sub.add_option("--threads", cfg.threads, "Worker cap (0 = OpenMP default)")
      ->envname("ETATEST_THREADS");
}

void add_estimation(CLI::App& sub, RunConfig& cfg) {
  sub.add_option("--delta", cfg.delta, "Neighborhood radius")->envname("ETATEST_DELTA");
  sub.add_option("--lambda", cfg.lambda, "Weight on L_x in the Lipschitz QP")
      ->envname("ETATEST_LAMBDA");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-driven stability verification with the eta-test"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* collect_cmd = app.add_subcommand("collect", "Sample a dataset for an experiment");
  add_common(*collect_cmd, cfg);

  auto* verify_cmd = app.add_subcommand("verify", "Run Lipschitz estimation and the eta-test");
  add_common(*verify_cmd, cfg);
  add_estimation(*verify_cmd, cfg);
  verify_cmd->add_option("--mode", cfg.mode, "stability, instability, both or discrete")
      ->envname("ETATEST_MODE")
      ->check(CLI::IsMember({"stability", "instability", "both", "discrete"}));
  verify_cmd->add_option("--epsilon-critical", cfg.epsilon_critical, "Near-critical threshold")
      ->envname("ETATEST_EPSILON_CRITICAL");
  verify_cmd->add_flag("--fail-fast", cfg.fail_fast, "Stop at the first failing state")
      ->envname("ETATEST_FAIL_FAST");
  verify_cmd->add_flag("--no-restore", cfg.no_restore,
                       "Report empty ball intersections as infeasible instead of growing radii")
      ->envname("ETATEST_NO_RESTORE");

  auto* grid_cmd = app.add_subcommand("export-grid", "Evaluate a field on a regular 2-D grid");
  add_common(*grid_cmd, cfg);
  add_estimation(*grid_cmd, cfg);
  grid_cmd->add_option("--field", cfg.field, "V, eta_max, eta_min, true_vdot, L_x or L_u")
      ->envname("ETATEST_FIELD");
  grid_cmd->add_option("--resolution", cfg.resolution, "Points per axis")
      ->envname("ETATEST_RESOLUTION");

  auto* linear_cmd =
      app.add_subcommand("linear-verify", "Check the data-driven linear dissipation criterion");
  add_common(*linear_cmd, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    CLI::App* active = app.get_subcommands().front();
    apply_config_file(*active, cfg);
    validate(cfg);
    if (active == collect_cmd) return cmd_collect(*active, cfg);
    if (active == verify_cmd) return cmd_verify(*active, cfg);
    if (active == grid_cmd) return cmd_export_grid(*active, cfg);
    return cmd_linear_verify(*active, cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
