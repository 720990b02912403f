#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "etatest/dataset.hpp"
#include "etatest/lipschitz.hpp"
#include "etatest/neighbor_index.hpp"
#include "etatest/systems.hpp"

namespace etatest {

enum class GridField { V, EtaMax, EtaMin, TrueVdot, Lx, Lu };
GridField parse_grid_field(std::string_view text);
std::string_view to_string(GridField field);

struct GridPoint {
  double x0;
  double x1;
  double value;  // NaN where undefined (no neighbors, or equilibrium for eta fields)
};

struct GridInputs {
  const Experiment* experiment = nullptr;
  const Dataset* data = nullptr;  // required for eta and Lipschitz fields
  const NeighborIndex* index = nullptr;
  const LipschitzField* field = nullptr;
  double delta = 0.1;
  int threads = 0;
};

/**
 * Regular resolution x resolution grid over the first two state dimensions
 * of the experiment bounds; remaining dimensions sit at the equilibrium.
 * Row-major with x1 varying fastest.
 *
 * Lipschitz fields report the entry of the nearest sample in joint
 * (x, pi(x)) space.
 */
std::vector<GridPoint> export_grid(const GridInputs& in, GridField field, int resolution);

void save_grid(const std::vector<GridPoint>& grid, const std::filesystem::path& csv);

}  // namespace etatest
