// Copyright (c) 2026 fgnet contributors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

#include "fgnet/core/rng.hpp"
#include "fgnet/filter/outlier_filter.hpp"

using fgnet::FilterParams;
using fgnet::FilterReport;
using fgnet::PointCloud;

namespace {

// Independent O(N^2) re-implementation of the two-pass removal used as the
// oracle everywhere in this file.
struct BruteResult {
  std::set<int> isolated;
  std::set<int> statistical;
  double mu = 0.0;
  double sigma = 0.0;
};

BruteResult brute_filter(const PointCloud& c, const FilterParams& p) {
  const std::size_t n = c.size();
  std::vector<int> cnt(n, 0);
  std::vector<double> mean_d(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    int k = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = std::sqrt(fgnet::squared_distance(c.point_ptr(i), c.point_ptr(j)));
      if (d <= p.radius) {
        ++k;
        sum += d;
      }
    }
    cnt[i] = k;
    mean_d[i] = k > 0 ? sum / k : 0.0;
  }
  BruteResult out;
  for (std::size_t i = 0; i < n; ++i)
    if (cnt[i] <= p.min_neighbors) out.isolated.insert(static_cast<int>(i));

  std::size_t survivors = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (!out.isolated.count(static_cast<int>(i))) {
      out.mu += mean_d[i];
      ++survivors;
    }
  if (survivors == 0) return out;
  out.mu /= static_cast<double>(survivors);
  for (std::size_t i = 0; i < n; ++i)
    if (!out.isolated.count(static_cast<int>(i))) {
      const double d = mean_d[i] - out.mu;
      out.sigma += d * d;
    }
  out.sigma = std::sqrt(out.sigma / static_cast<double>(survivors));
  for (std::size_t i = 0; i < n; ++i) {
    if (out.isolated.count(static_cast<int>(i))) continue;
    if (mean_d[i] < out.mu - p.sigma_multiplier * out.sigma ||
        mean_d[i] > out.mu + p.sigma_multiplier * out.sigma)
      out.statistical.insert(static_cast<int>(i));
  }
  return out;
}

PointCloud grid_with_outlier() {
  PointCloud c;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) c.push_point(0.1 * i, 0.1 * j, 0.0);
  c.push_point(10.0, 10.0, 10.0);
  return c;
}

}  // namespace

TEST_CASE("empty cloud filters to an empty cloud") {
  FilterParams p;
  const auto [out, report] = fgnet::filter(PointCloud{}, p);
  CHECK(out.size() == 0);
  CHECK(report.removed_isolated.empty());
  CHECK(report.removed_statistical.empty());
  CHECK(report.mu == 0.0);
  CHECK(report.sigma == 0.0);
}

TEST_CASE("a lone point is removed as isolated") {
  PointCloud c;
  c.push_point(1.0, 2.0, 3.0);
  FilterParams p;
  p.radius = 0.5;
  p.min_neighbors = 1;
  const auto [out, report] = fgnet::filter(c, p);
  CHECK(out.size() == 0);
  REQUIRE(report.removed_isolated.size() == 1);
  CHECK(report.removed_isolated[0] == 0);
}

TEST_CASE("grid plus far outlier matches the brute-force oracle") {
  const PointCloud c = grid_with_outlier();
  FilterParams p;
  p.radius = 0.3;
  p.min_neighbors = 2;
  p.sigma_multiplier = 2.0;

  const auto want = brute_filter(c, p);
  const auto [out, report] = fgnet::filter(c, p);

  // The far point has zero neighbors and must be the sole isolation removal.
  REQUIRE(report.removed_isolated.size() == 1);
  CHECK(report.removed_isolated[0] == 100);

  CHECK(std::set<int>(report.removed_isolated.begin(), report.removed_isolated.end()) ==
        want.isolated);
  CHECK(std::set<int>(report.removed_statistical.begin(), report.removed_statistical.end()) ==
        want.statistical);
  CHECK(report.mu == Catch::Approx(want.mu).epsilon(1e-9));
  CHECK(report.sigma == Catch::Approx(want.sigma).epsilon(1e-9));
  CHECK(out.size() == c.size() - want.isolated.size() - want.statistical.size());
}

TEST_CASE("random clouds match the brute-force oracle exactly") {
  fgnet::Rng rng(77);
  for (int t = 0; t < 8; ++t) {
    PointCloud c;
    const std::size_t n = 60 + 40 * t;
    for (std::size_t i = 0; i < n; ++i)
      c.push_point(rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 0.2));
    FilterParams p;
    p.radius = 0.15;
    p.min_neighbors = 2;
    p.sigma_multiplier = 1.5;

    const auto want = brute_filter(c, p);
    const auto [out, report] = fgnet::filter(c, p);
    CHECK(std::set<int>(report.removed_isolated.begin(), report.removed_isolated.end()) ==
          want.isolated);
    CHECK(std::set<int>(report.removed_statistical.begin(), report.removed_statistical.end()) ==
          want.statistical);
    if (want.mu != 0.0) CHECK(report.mu == Catch::Approx(want.mu).epsilon(1e-9));
    if (want.sigma != 0.0) CHECK(report.sigma == Catch::Approx(want.sigma).epsilon(1e-9));
  }
}

TEST_CASE("survivors are bit-identical copies in input order") {
  fgnet::Rng rng(5);
  PointCloud c;
  c.feature_width = 2;
  for (int i = 0; i < 120; ++i) {
    c.push_point(rng.uniform(0, 1), rng.uniform(0, 1), 0.0);
    c.features.push_back(rng.uniform(0, 1));
    c.features.push_back(rng.uniform(0, 1));
    c.labels.push_back(i % 3);
  }
  FilterParams p;
  p.radius = 0.2;
  p.min_neighbors = 2;
  const auto [out, report] = fgnet::filter(c, p);

  std::set<int> removed(report.removed_isolated.begin(), report.removed_isolated.end());
  removed.insert(report.removed_statistical.begin(), report.removed_statistical.end());
  std::size_t at = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (removed.count(static_cast<int>(i))) continue;
    CHECK(out.coords[3 * at] == c.coords[3 * i]);
    CHECK(out.coords[3 * at + 1] == c.coords[3 * i + 1]);
    CHECK(out.coords[3 * at + 2] == c.coords[3 * i + 2]);
    CHECK(out.features[2 * at] == c.features[2 * i]);
    CHECK(out.features[2 * at + 1] == c.features[2 * i + 1]);
    CHECK(out.labels[at] == c.labels[i]);
    ++at;
  }
  CHECK(at == out.size());

  // removal sets are disjoint
  std::set<int> iso(report.removed_isolated.begin(), report.removed_isolated.end());
  for (int id : report.removed_statistical) CHECK(!iso.count(id));
}
