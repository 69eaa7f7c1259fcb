// Copyright (c) 2026 fgnet contributors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <array>
#include <cmath>

#include "fgnet/core/grid_index.hpp"
#include "fgnet/core/point_cloud.hpp"
#include "fgnet/core/rng.hpp"

using fgnet::GridIndex;
using fgnet::Neighbor;
using fgnet::PointCloud;
using fgnet::Rng;

namespace {

PointCloud random_cloud(std::size_t n, Rng& rng, double extent = 1.0) {
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i)
    c.push_point(rng.uniform(-extent, extent), rng.uniform(-extent, extent),
                 rng.uniform(-extent, extent));
  return c;
}

// O(N) reference scan, same arithmetic as the index path.
std::vector<Neighbor> brute_radius(const PointCloud& c, const std::array<double, 3>& q, double r) {
  std::vector<Neighbor> out;
  const double r2 = r * r;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double d2 = fgnet::squared_distance(c.point_ptr(i), q.data());
    if (d2 <= r2) out.push_back({std::sqrt(d2), static_cast<int>(i)});
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Neighbor> brute_knn(const PointCloud& c, const std::array<double, 3>& q,
                                std::size_t k) {
  std::vector<Neighbor> all;
  for (std::size_t i = 0; i < c.size(); ++i)
    all.push_back({std::sqrt(fgnet::squared_distance(c.point_ptr(i), q.data())),
                   static_cast<int>(i)});
  std::sort(all.begin(), all.end());
  if (all.size() > k) all.resize(k);
  return all;
}

}  // namespace

TEST_CASE("empty cloud builds an index with zero cells") {
  PointCloud c;
  GridIndex idx(c, 1.0);
  CHECK(idx.cell_count() == 0);
}

TEST_CASE("single point at origin lands in cell (0,0,0)") {
  PointCloud c;
  c.push_point(0.0, 0.0, 0.0);
  GridIndex idx(c, 1.0);
  CHECK(idx.cell_count() == 1);
  const auto members = idx.cell_members({0.0, 0.0, 0.0});
  REQUIRE(members.size() == 1);
  CHECK(members[0] == 0);
}

TEST_CASE("every point is retrievable via its own cell") {
  Rng rng(17);
  PointCloud c = random_cloud(1000, rng);
  GridIndex idx(c, 0.25);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto members = idx.cell_members(c.point(i));
    CHECK(std::find(members.begin(), members.end(), static_cast<int>(i)) != members.end());
  }
}

TEST_CASE("non-finite coordinate is rejected with the point id") {
  PointCloud c;
  c.push_point(0.0, 0.0, 0.0);
  c.push_point(std::nan(""), 0.0, 0.0);
  CHECK_THROWS_WITH(GridIndex(c, 1.0), Catch::Matchers::ContainsSubstring("point 1"));
}

TEST_CASE("radius query far outside the bounding box returns nothing") {
  Rng rng(3);
  PointCloud c = random_cloud(100, rng);
  GridIndex idx(c, 0.5);
  CHECK(idx.radius_query(c, {100.0, 100.0, 100.0}, 1.0).empty());
}

TEST_CASE("radius boundary is inclusive and results are distance ordered") {
  PointCloud c;
  c.push_point(0.5, 0.0, 0.0);
  c.push_point(1.0, 0.0, 0.0);
  c.push_point(1.5, 0.0, 0.0);
  GridIndex idx(c, 1.0);
  const auto hits = idx.radius_query(c, {0.0, 0.0, 0.0}, 1.0);
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].id == 0);
  CHECK(hits[1].id == 1);
  CHECK(hits[1].distance == 1.0);
}

TEST_CASE("radius query equals the brute-force scan") {
  Rng rng(11);
  PointCloud c = random_cloud(500, rng);
  GridIndex idx(c, 0.3);
  for (int t = 0; t < 50; ++t) {
    const std::array<double, 3> q{rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2),
                                  rng.uniform(-1.2, 1.2)};
    const double r = rng.uniform(0.05, 1.0);
    const auto got = idx.radius_query(c, q, r);
    const auto want = brute_radius(c, q, r);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == want[i]);
  }
}

TEST_CASE("knn with k=1 on an existing point returns that point") {
  Rng rng(5);
  PointCloud c = random_cloud(64, rng);
  GridIndex idx(c, 0.2);
  const auto hits = idx.knn_query(c, c.point(17), 1);
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].id == 17);
  CHECK(hits[0].distance == 0.0);
}

TEST_CASE("knn saturates to the whole cloud when k >= N") {
  Rng rng(6);
  PointCloud c = random_cloud(10, rng);
  GridIndex idx(c, 0.2);
  CHECK(idx.knn_query(c, {0.0, 0.0, 0.0}, 10).size() == 10);
  CHECK(idx.knn_query(c, {0.0, 0.0, 0.0}, 25).size() == 10);
}

TEST_CASE("knn on an empty cloud is an error") {
  PointCloud c;
  GridIndex idx(c, 1.0);
  CHECK_THROWS_AS(idx.knn_query(c, {0.0, 0.0, 0.0}, 1), std::invalid_argument);
}

TEST_CASE("knn equals the brute-force sort") {
  Rng rng(23);
  for (int t = 0; t < 20; ++t) {
    PointCloud c = random_cloud(200 + 13 * t, rng);
    GridIndex idx(c, 0.15);
    const std::array<double, 3> q{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const std::size_t k = 1 + static_cast<std::size_t>(rng.uniform_index(32));
    const auto got = idx.knn_query(c, q, k);
    const auto want = brute_knn(c, q, k);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == want[i]);
  }
}

TEST_CASE("repeated queries return byte-identical results") {
  Rng rng(9);
  PointCloud c = random_cloud(300, rng);
  GridIndex idx(c, 0.2);
  const auto a = idx.radius_query(c, {0.1, -0.2, 0.3}, 0.4);
  const auto b = idx.radius_query(c, {0.1, -0.2, 0.3}, 0.4);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("neighborhood symmetry on random clouds") {
  Rng rng(31);
  PointCloud c = random_cloud(150, rng);
  GridIndex idx(c, 0.3);
  const double r = 0.35;
  const auto lists = idx.radius_search_all(c, c, r);
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t s = lists.offsets[i]; s < lists.offsets[i + 1]; ++s) {
      const int j = lists.indices[s];
      bool back = false;
      for (std::size_t t = lists.offsets[j]; t < lists.offsets[j + 1]; ++t)
        if (lists.indices[t] == static_cast<int>(i)) back = true;
      CHECK(back);
    }
  }
}

TEST_CASE("batched search matches per-query results") {
  Rng rng(41);
  PointCloud c = random_cloud(200, rng);
  GridIndex idx(c, 0.25);
  const auto lists = idx.radius_search_all(c, c, 0.3);
  REQUIRE(lists.query_count == c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto want = idx.radius_query(c, c.point(i), 0.3);
    REQUIRE(lists.count(i) == want.size());
    for (std::size_t s = 0; s < want.size(); ++s) {
      CHECK(lists.ids(i)[s] == want[s].id);
      CHECK(lists.dists(i)[s] == want[s].distance);
    }
  }
}
