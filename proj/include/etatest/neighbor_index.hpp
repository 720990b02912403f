#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "etatest/dataset.hpp"

namespace etatest {

/**
 * Radius queries over the concatenated (x, u) vectors of a dataset.
 *
 * Points are bucketed into a uniform grid of hashed cells whose edge is the
 * expected query radius; only occupied cells are stored. When the joint
 * dimension exceeds kMaxGridDims, or a query would touch more cells than
 * there are points, queries fall back to a linear scan. Both paths use the
 * same distance test, so results are identical to brute force.
 *
 * The index copies the points it needs and does not reference the dataset
 * after construction.
 */
class NeighborIndex {
 public:
  static constexpr int kMaxGridDims = 6;

  NeighborIndex(const Dataset& data, double cell_size);

  /// Indices j with ||concat(x, u) - concat(x_j, u_j)|| <= delta, ascending.
  std::vector<std::size_t> query(const Eigen::Ref<const Vec>& x, const Eigen::Ref<const Vec>& u,
                                 double delta) const;
  std::vector<std::size_t> query(std::span<const double> point, double delta) const;

  /// Linear-scan reference with the same contract as query().
  std::vector<std::size_t> brute_force(std::span<const double> point, double delta) const;

  std::size_t size() const { return count_; }
  int dims() const { return dims_; }
  double cell_size() const { return cell_; }
  bool uses_grid() const { return use_grid_; }

 private:
  using Key = std::array<std::int64_t, kMaxGridDims>;
  struct KeyHash {
    std::size_t operator()(const Key& key) const noexcept;
  };

  bool within(std::span<const double> point, std::size_t j, double delta_sq) const;
  std::int64_t cell_coord(double v, int axis) const;

  int dims_;
  std::size_t count_;
  double cell_;
  bool use_grid_ = false;
  std::vector<double> points_;  // count_ x dims_, row-major
  std::vector<double> origin_;
  std::unordered_map<Key, std::vector<std::uint32_t>, KeyHash> cells_;
};

}  // namespace etatest
