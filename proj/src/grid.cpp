#include "etatest/grid.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "etatest/io.hpp"
#include "etatest/verify.hpp"
#include "parallel.hpp"

namespace etatest {

GridField parse_grid_field(std::string_view text) {
  for (auto f : {GridField::V, GridField::EtaMax, GridField::EtaMin, GridField::TrueVdot,
                 GridField::Lx, GridField::Lu}) {
    if (to_string(f) == text) return f;
  }
  throw Error("unknown grid field '" + std::string(text) + "'");
}

std::string_view to_string(GridField field) {
  switch (field) {
    case GridField::V: return "V";
    case GridField::EtaMax: return "eta_max";
    case GridField::EtaMin: return "eta_min";
    case GridField::TrueVdot: return "true_vdot";
    case GridField::Lx: return "L_x";
    case GridField::Lu: return "L_u";
  }
  return "V";
}

std::vector<GridPoint> export_grid(const GridInputs& in, GridField field, int resolution) {
  if (!in.experiment) throw Error("grid export needs an experiment");
  if (resolution < 2) throw Error("grid resolution must be at least 2");
  const Experiment& ex = *in.experiment;
  const bool needs_data = field != GridField::V && field != GridField::TrueVdot;
  if (needs_data && !(in.data && in.index && in.field)) {
    throw Error("grid field " + std::string(to_string(field)) +
                " needs a dataset, index and Lipschitz field");
  }
  if (ex.bounds.size() < 2) throw Error("grid export needs at least two state dimensions");

  const Vec& eq = ex.system.equilibrium();
  const double eq_tol = default_eq_tol(ex.bounds);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const auto res = static_cast<std::size_t>(resolution);
  std::vector<GridPoint> grid(res * res);

  auto coord = [&](int axis, std::size_t k) {
    const auto& b = ex.bounds[axis];
    return b.lo + b.width() * static_cast<double>(k) / static_cast<double>(res - 1);
  };

  detail::parallel_for(static_cast<std::int64_t>(grid.size()), in.threads, [&](std::int64_t cell) {
    const auto r = static_cast<std::size_t>(cell) / res;
    const auto c = static_cast<std::size_t>(cell) % res;
    Vec x = eq;
    x[0] = coord(0, r);
    x[1] = coord(1, c);
    double value = nan;
    switch (field) {
      case GridField::V:
        value = ex.lyapunov.value(x);
        break;
      case GridField::TrueVdot:
        value = true_vdot(ex.system, ex.policy, ex.lyapunov, x);
        break;
      case GridField::EtaMax:
      case GridField::EtaMin: {
        if ((x - eq).norm() <= eq_tol) break;
        const Mode mode = field == GridField::EtaMax ? Mode::Stability : Mode::Instability;
        const auto rep = evaluate_state(*in.data, *in.index, ex.policy, ex.lyapunov, *in.field, x,
                                        in.delta, mode);
        const auto& eta = field == GridField::EtaMax ? rep.eta_max : rep.eta_min;
        if (eta) value = *eta;
        break;
      }
      case GridField::Lx:
      case GridField::Lu: {
        const Vec u = ex.policy(x);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j : in.index->query(x, u, in.delta)) {
          const double d = (x - in.data->x(j)).squaredNorm() + (u - in.data->u(j)).squaredNorm();
          if (d < best) {
            best = d;
            value = field == GridField::Lx ? (*in.field)[j].lx : (*in.field)[j].lu;
          }
        }
        break;
      }
    }
    grid[static_cast<std::size_t>(cell)] = {x[0], x[1], value};
  });
  return grid;
}

void save_grid(const std::vector<GridPoint>& grid, const std::filesystem::path& csv) {
  if (csv.has_parent_path()) std::filesystem::create_directories(csv.parent_path());
  std::ofstream out(csv);
  if (!out) throw Error("cannot write " + csv.string());
  out << "x0,x1,value\n";
  for (const auto& g : grid) {
    out << format_real(g.x0) << ',' << format_real(g.x1) << ','
        << (std::isnan(g.value) ? std::string("nan") : format_real(g.value)) << '\n';
  }
}

}  // namespace etatest
