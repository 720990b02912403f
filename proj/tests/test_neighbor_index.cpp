#include <doctest.h>

#include <algorithm>
#include <random>

#include "etatest/neighbor_index.hpp"
#include "oracles.hpp"

using namespace etatest;

namespace {

Dataset random_dataset(std::mt19937_64& rng, int n, int m, std::size_t count) {
  Dataset d(n, m);
  for (std::size_t i = 0; i < count; ++i) {
    d.add(oracle::uniform_vec(rng, n, -1.0, 1.0), oracle::uniform_vec(rng, m, -1.0, 1.0),
          oracle::uniform_vec(rng, n, -1.0, 1.0));
  }
  return d;
}

std::vector<double> joint_points(const Dataset& d) {
  std::vector<double> pts;
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (int k = 0; k < d.n(); ++k) pts.push_back(d.x(i)[k]);
    for (int k = 0; k < d.m(); ++k) pts.push_back(d.u(i)[k]);
  }
  return pts;
}

}  // namespace

TEST_CASE("queries match a brute-force scan") {
  std::mt19937_64 rng(11);
  for (auto [n, m] : {std::pair{2, 1}, std::pair{4, 1}, std::pair{3, 2}, std::pair{6, 2}}) {
    const Dataset d = random_dataset(rng, n, m, 500);
    const auto pts = joint_points(d);
    for (double delta : {0.05, 0.3, 0.9}) {
      const NeighborIndex index(d, delta);
      CHECK(index.uses_grid() == (n + m <= NeighborIndex::kMaxGridDims));
      for (int q = 0; q < 100; ++q) {
        const Vec p = oracle::uniform_vec(rng, n + m, -1.2, 1.2);
        const auto expect = oracle::scan_neighbors(pts, n + m, {p.data(), std::size_t(p.size())}, delta);
        CHECK(index.query({p.data(), std::size_t(p.size())}, delta) == expect);
        CHECK(index.brute_force({p.data(), std::size_t(p.size())}, delta) == expect);
      }
    }
  }
}

TEST_CASE("zero radius at a sample returns the sample and exact duplicates") {
  Dataset d(2, 1);
  Vec x(2), u(1), y(2);
  x << 0.3, -0.2;
  u << 0.1;
  y << 1.0, 1.0;
  d.add(x, u, y);
  d.add(x * 0.5, u, y);
  d.add(x, u, y);
  const NeighborIndex index(d, 0.1);
  CHECK(index.query(x, u, 0.0) == std::vector<std::size_t>{0, 2});
}

TEST_CASE("a query far from the data is empty") {
  std::mt19937_64 rng(3);
  const Dataset d = random_dataset(rng, 2, 1, 200);
  const NeighborIndex index(d, 0.1);
  Vec x(2), u(1);
  x << 5.0, 5.0;
  u << 0.0;
  CHECK(index.query(x, u, 0.1).empty());
}

TEST_CASE("neighbor sets are symmetric and monotone in delta") {
  std::mt19937_64 rng(5);
  const Dataset d = random_dataset(rng, 2, 1, 400);
  const NeighborIndex index(d, 0.2);
  std::vector<std::vector<std::size_t>> sets(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) sets[i] = index.query(d.x(i), d.u(i), 0.2);
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j : sets[i]) CHECK(std::binary_search(sets[j].begin(), sets[j].end(), i));
    const auto small = index.query(d.x(i), d.u(i), 0.1);
    CHECK(std::includes(sets[i].begin(), sets[i].end(), small.begin(), small.end()));
  }
}

TEST_CASE("points exactly on the query sphere are included") {
  Dataset d(1, 1);
  Vec x(1), u(1), y(1);
  y << 0.0;
  for (double v : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    x << v;
    u << 0.0;
    d.add(x, u, y);
  }
  const NeighborIndex index(d, 0.25);
  x << 0.5;
  u << 0.0;
  CHECK(index.query(x, u, 0.25) == std::vector<std::size_t>{1, 2, 3});
}

TEST_CASE("an empty dataset answers every query with nothing") {
  const Dataset d(2, 1);
  const NeighborIndex index(d, 0.1);
  CHECK(index.query(Vec::Zero(2), Vec::Zero(1), 10.0).empty());
}
