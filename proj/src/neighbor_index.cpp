#include "etatest/neighbor_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace etatest {

namespace {
// Beyond this many cells per axis the integer cell coordinates stop being useful.
constexpr double kMaxCellsPerAxis = 1e15;
}  // namespace

std::size_t NeighborIndex::KeyHash::operator()(const Key& key) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (auto k : key) {
    h ^= static_cast<std::uint64_t>(k) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

NeighborIndex::NeighborIndex(const Dataset& data, double cell_size)
    : dims_(data.n() + data.m()), count_(data.size()), cell_(cell_size) {
  points_.resize(count_ * dims_);
  for (std::size_t i = 0; i < count_; ++i) {
    double* row = points_.data() + i * dims_;
    for (int k = 0; k < data.n(); ++k) row[k] = data.x(i)[k];
    for (int k = 0; k < data.m(); ++k) row[data.n() + k] = data.u(i)[k];
  }
  if (count_ == 0 || dims_ > kMaxGridDims || !(cell_ > 0.0) || !std::isfinite(cell_)) return;

  origin_.assign(dims_, std::numeric_limits<double>::infinity());
  std::vector<double> top(dims_, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < count_; ++i) {
    for (int k = 0; k < dims_; ++k) {
      origin_[k] = std::min(origin_[k], points_[i * dims_ + k]);
      top[k] = std::max(top[k], points_[i * dims_ + k]);
    }
  }
  for (int k = 0; k < dims_; ++k) {
    if ((top[k] - origin_[k]) / cell_ > kMaxCellsPerAxis) return;
  }

  use_grid_ = true;
  for (std::size_t i = 0; i < count_; ++i) {
    Key key{};
    for (int k = 0; k < dims_; ++k) key[k] = cell_coord(points_[i * dims_ + k], k);
    cells_[key].push_back(static_cast<std::uint32_t>(i));
  }
}

std::int64_t NeighborIndex::cell_coord(double v, int axis) const {
  return static_cast<std::int64_t>(std::floor((v - origin_[axis]) / cell_));
}

bool NeighborIndex::within(std::span<const double> point, std::size_t j, double delta_sq) const {
  const double* row = points_.data() + j * dims_;
  double sq = 0.0;
  for (int k = 0; k < dims_; ++k) {
    const double d = point[k] - row[k];
    sq += d * d;
  }
  return sq <= delta_sq;
}

std::vector<std::size_t> NeighborIndex::query(const Eigen::Ref<const Vec>& x,
                                              const Eigen::Ref<const Vec>& u,
                                              double delta) const {
  double buf[kMaxGridDims];
  std::vector<double> heap;
  double* point = buf;
  if (dims_ > kMaxGridDims) {
    heap.resize(dims_);
    point = heap.data();
  }
  const auto n = x.size();
  for (Eigen::Index k = 0; k < n; ++k) point[k] = x[k];
  for (Eigen::Index k = 0; k < u.size(); ++k) point[n + k] = u[k];
  return query(std::span<const double>(point, dims_), delta);
}

std::vector<std::size_t> NeighborIndex::brute_force(std::span<const double> point,
                                                    double delta) const {
  std::vector<std::size_t> out;
  if (!(delta >= 0.0)) return out;
  const double delta_sq = delta * delta;
  for (std::size_t j = 0; j < count_; ++j) {
    if (within(point, j, delta_sq)) out.push_back(j);
  }
  return out;
}

std::vector<std::size_t> NeighborIndex::query(std::span<const double> point, double delta) const {
  if (static_cast<int>(point.size()) != dims_) throw Error("query dimension mismatch");
  if (!use_grid_ || !(delta >= 0.0)) return brute_force(point, delta);

  Key lo{};
  Key hi{};
  double cells = 1.0;
  for (int k = 0; k < dims_; ++k) {
    // Widened by a sliver of a cell so rounding never drops a boundary point.
    const double a = (point[k] - delta - origin_[k]) / cell_ - 1e-7;
    const double b = (point[k] + delta - origin_[k]) / cell_ + 1e-7;
    if (std::abs(a) > kMaxCellsPerAxis || std::abs(b) > kMaxCellsPerAxis) {
      return brute_force(point, delta);
    }
    lo[k] = static_cast<std::int64_t>(std::floor(a));
    hi[k] = static_cast<std::int64_t>(std::floor(b));
    cells *= static_cast<double>(hi[k] - lo[k] + 1);
  }
  if (cells > static_cast<double>(count_)) return brute_force(point, delta);

  const double delta_sq = delta * delta;
  std::vector<std::size_t> out;
  Key key = lo;
  while (true) {
    if (auto it = cells_.find(key); it != cells_.end()) {
      for (auto j : it->second) {
        if (within(point, j, delta_sq)) out.push_back(j);
      }
    }
    int k = 0;
    for (; k < dims_; ++k) {
      if (++key[k] <= hi[k]) break;
      key[k] = lo[k];
    }
    if (k == dims_) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace etatest
