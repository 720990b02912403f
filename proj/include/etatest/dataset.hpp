#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "etatest/types.hpp"

namespace etatest {

class SystemSpec;
class Policy;

/// One (x, u, y) triple. y is the state derivative for continuous-time data
/// and the successor state for discrete-time data.
struct Sample {
  Vec x;
  Vec u;
  Vec y;
};

/// Provenance of a dataset, carried through the manifest file.
struct DatasetMeta {
  std::string system;
  std::string policy;
  std::uint64_t seed = 0;
  Bounds bounds;
  double noise_amp = 0.0;

  friend bool operator==(const DatasetMeta&, const DatasetMeta&) = default;
};

/**
 * Datatic description of a plant: a finite set of samples with fixed state
 * dimension n and action dimension m.
 *
 * Samples are stored row-major in three flat buffers so that per-sample views
 * are contiguous. The container is append-only; once built it is shared
 * read-only between workers.
 */
class Dataset {
 public:
  using ConstView = Eigen::Map<const Vec>;

  Dataset(int n, int m, TimeKind kind = TimeKind::Continuous, DatasetMeta meta = {});

  /// Appends a sample. Throws Error on a dimension mismatch or a non-finite entry.
  void add(const Eigen::Ref<const Vec>& x, const Eigen::Ref<const Vec>& u,
           const Eigen::Ref<const Vec>& y);
  void add(const Sample& s) { add(s.x, s.u, s.y); }
  void reserve(std::size_t count);

  std::size_t size() const { return xs_.size() / static_cast<std::size_t>(n_); }
  bool empty() const { return xs_.empty(); }
  int n() const { return n_; }
  int m() const { return m_; }
  TimeKind time_kind() const { return kind_; }
  const DatasetMeta& meta() const { return meta_; }
  DatasetMeta& meta() { return meta_; }

  ConstView x(std::size_t i) const { return {xs_.data() + i * n_, n_}; }
  ConstView u(std::size_t i) const { return {us_.data() + i * m_, m_}; }
  ConstView y(std::size_t i) const { return {ys_.data() + i * n_, n_}; }
  Sample sample(std::size_t i) const { return {x(i), u(i), y(i)}; }

  std::span<const double> raw_x() const { return xs_; }
  std::span<const double> raw_u() const { return us_; }
  std::span<const double> raw_y() const { return ys_; }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  int n_;
  int m_;
  TimeKind kind_;
  DatasetMeta meta_;
  std::vector<double> xs_;
  std::vector<double> us_;
  std::vector<double> ys_;
};

/// Throws Error when two samples share (x, u) within `tol` but disagree on y
/// by more than `tol`. Such data makes the Lipschitz estimate infeasible.
void check_consistency(const Dataset& data, double tol = 1e-9);

/**
 * Synthesizes a dataset from a known plant.
 *
 * States are drawn uniformly per dimension from `bounds`, actions are
 * `policy(x)` plus independent uniform noise on [-noise_amp, noise_amp], and
 * y is the exact plant response. The same seed reproduces the same bits.
 */
Dataset collect(const SystemSpec& system, const Policy& policy, std::size_t count,
                const Bounds& bounds, double noise_amp, std::uint64_t seed);

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw.
template <typename Engine>
double uniform01(Engine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

// CSV + JSON manifest persistence. The manifest lives next to the CSV with
// the extension replaced by ".json".
std::filesystem::path manifest_path(const std::filesystem::path& csv);
void save(const Dataset& data, const std::filesystem::path& csv);
Dataset load(const std::filesystem::path& csv);

}  // namespace etatest
