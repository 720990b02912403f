#include "etatest/dataset.hpp"

#include <cmath>
#include <random>
#include <string>

#include "etatest/neighbor_index.hpp"
#include "etatest/systems.hpp"

namespace etatest {

Dataset::Dataset(int n, int m, TimeKind kind, DatasetMeta meta)
    : n_(n), m_(m), kind_(kind), meta_(std::move(meta)) {
  if (n <= 0 || m <= 0) throw Error("dataset dimensions must be positive");
}

void Dataset::reserve(std::size_t count) {
  xs_.reserve(count * n_);
  us_.reserve(count * m_);
  ys_.reserve(count * n_);
}

void Dataset::add(const Eigen::Ref<const Vec>& x, const Eigen::Ref<const Vec>& u,
                  const Eigen::Ref<const Vec>& y) {
  if (x.size() != n_ || u.size() != m_ || y.size() != n_) {
    throw Error("sample dimensions (" + std::to_string(x.size()) + ", " +
                std::to_string(u.size()) + ", " + std::to_string(y.size()) +
                ") do not match dataset (" + std::to_string(n_) + ", " + std::to_string(m_) +
                ", " + std::to_string(n_) + ")");
  }
  if (!x.allFinite() || !u.allFinite() || !y.allFinite()) {
    throw Error("sample " + std::to_string(size()) + " has a non-finite entry");
  }
  xs_.insert(xs_.end(), x.data(), x.data() + n_);
  us_.insert(us_.end(), u.data(), u.data() + m_);
  ys_.insert(ys_.end(), y.data(), y.data() + n_);
}

void check_consistency(const Dataset& data, double tol) {
  if (data.size() < 2) return;
  const NeighborIndex index(data, std::max(tol, 1e-6));
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j : index.query(data.x(i), data.u(i), tol)) {
      if (j <= i) continue;
      if ((data.y(i) - data.y(j)).norm() > tol) {
        throw Error("samples " + std::to_string(i) + " and " + std::to_string(j) +
                    " share (x, u) but have different y");
      }
    }
  }
}

Dataset collect(const SystemSpec& system, const Policy& policy, std::size_t count,
                const Bounds& bounds, double noise_amp, std::uint64_t seed) {
  const int n = system.n();
  const int m = system.m();
  if (static_cast<int>(bounds.size()) != n) {
    throw Error("bounds have " + std::to_string(bounds.size()) + " dimensions, system has " +
                std::to_string(n));
  }
  if (policy.action_dim() != m) {
    throw Error("policy action dimension " + std::to_string(policy.action_dim()) +
                " does not match system action dimension " + std::to_string(m));
  }
  if (!(noise_amp >= 0.0)) throw Error("noise amplitude must be nonnegative");

  Dataset data(n, m, system.time_kind(),
               DatasetMeta{system.name(), policy.name(), seed, bounds, noise_amp});
  data.reserve(count);

  std::mt19937_64 engine(seed);
  Vec x(n);
  Vec u(m);
  for (std::size_t s = 0; s < count; ++s) {
    for (int k = 0; k < n; ++k) x[k] = bounds[k].lo + bounds[k].width() * uniform01(engine);
    u = policy(x);
    for (int k = 0; k < m; ++k) u[k] += noise_amp * (2.0 * uniform01(engine) - 1.0);
    data.add(x, u, system(x, u));
  }
  check_consistency(data);
  return data;
}

}  // namespace etatest
