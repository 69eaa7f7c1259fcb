// Copyright (c) 2026 fgnet contributors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

#include "fgnet/core/rng.hpp"
#include "fgnet/sample/gumbel_sampler.hpp"
#include "gradcheck_util.hpp"

using fgnet::GumbelSampler;
using fgnet::PointCloud;
using fgnet::Rng;
namespace ad = fgnet::ad;

namespace {

PointCloud random_cloud(std::size_t n, int feature_width, Rng& rng) {
  PointCloud c;
  c.feature_width = feature_width;
  for (std::size_t i = 0; i < n; ++i) {
    c.push_point(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    for (int f = 0; f < feature_width; ++f) c.features.push_back(rng.uniform(-1, 1));
  }
  return c;
}

}  // namespace

TEST_CASE("soft selection rows sum to one across the anneal range") {
  Rng rng(21);
  PointCloud c = random_cloud(32, 2, rng);
  for (double tau : {0.05, 0.1, 0.5, 1.0}) {
    GumbelSampler s = GumbelSampler::make(5, 2, 7, tau);
    const auto [soft, points] = fgnet::gumbel_soft_select(s, c);
    REQUIRE(soft.rows() == 5);
    REQUIRE(soft.cols() == 32);
    for (int r = 0; r < soft.rows(); ++r) {
      double sum = 0.0;
      for (int i = 0; i < soft.cols(); ++i) sum += soft.at(r, i);
      CHECK(sum == Catch::Approx(1.0).margin(1e-6));
    }
  }
}

TEST_CASE("very hot temperature flattens each row to 1/N") {
  Rng rng(22);
  PointCloud c = random_cloud(16, 1, rng);
  GumbelSampler s = GumbelSampler::make(3, 1, 9, 1e6);
  const auto [soft, points] = fgnet::gumbel_soft_select(s, c);
  for (int r = 0; r < soft.rows(); ++r)
    for (int i = 0; i < soft.cols(); ++i)
      CHECK(std::abs(soft.at(r, i) - 1.0 / 16.0) < 1e-3);
}

TEST_CASE("cold temperature with shared noise matches the hard selection") {
  Rng rng(23);
  PointCloud c = random_cloud(24, 2, rng);
  GumbelSampler s = GumbelSampler::make(4, 2, 31, 1e-6);
  const auto [soft, points] = fgnet::gumbel_soft_select(s, c);
  const auto hard = fgnet::gumbel_hard_select(s, c);

  // each soft row must be one-hot at the hard winner (no collisions here)
  std::set<int> uniq(hard.begin(), hard.end());
  REQUIRE(uniq.size() == hard.size());
  for (int r = 0; r < soft.rows(); ++r) {
    int arg = 0;
    double best = soft.at(r, 0);
    for (int i = 1; i < soft.cols(); ++i)
      if (soft.at(r, i) > best) {
        best = soft.at(r, i);
        arg = i;
      }
    CHECK(arg == hard[r]);
    CHECK(best == Catch::Approx(1.0).margin(1e-6));
  }
}

TEST_CASE("soft points equal the soft matrix applied to the point matrix") {
  Rng rng(24);
  PointCloud c = random_cloud(12, 1, rng);
  GumbelSampler s = GumbelSampler::make(3, 1, 5, 0.7);
  const auto [soft, points] = fgnet::gumbel_soft_select(s, c);
  REQUIRE(points.rows() == 3);
  REQUIRE(points.cols() == 4);
  for (int r = 0; r < 3; ++r)
    for (int col = 0; col < 4; ++col) {
      double acc = 0.0;
      for (int i = 0; i < 12; ++i) {
        const double pv = col < 3 ? c.coords[3 * i + col] : c.features[i];
        acc += soft.at(r, i) * pv;
      }
      CHECK(points.at(r, col) == Catch::Approx(acc).margin(1e-12));
    }
}

TEST_CASE("soft selection gradients match finite differences") {
  Rng rng(25);
  PointCloud c = random_cloud(8, 1, rng);
  GumbelSampler s = GumbelSampler::make(3, 1, 3, 0.6);
  ad::Tensor pts = fgnet::detail::point_matrix(c, true);
  ad::Tensor w = ad::Tensor::from_values(
      3, 4, gradcheck::random_values(12, rng, 0.4, 1.2));

  auto build = [&] {
    const auto [soft, soft_pts] = fgnet::gumbel_soft_select(s, pts);
    return ad::sum_all(ad::mul(soft_pts, w));
  };
  CHECK(gradcheck::max_rel_err(build, {s.weights, pts}) < 1e-4);
}

TEST_CASE("hard selection with one row picks the argmax") {
  Rng rng(26);
  PointCloud c = random_cloud(10, 0, rng);
  GumbelSampler s = GumbelSampler::make(1, 0, 77, 1.0);
  const auto picked = fgnet::gumbel_hard_select(s, c);
  REQUIRE(picked.size() == 1);
  CHECK(picked[0] >= 0);
  CHECK(picked[0] < 10);
}

TEST_CASE("zero-noise hook reduces hard selection to plain argmax") {
  PointCloud c;
  c.feature_width = 0;
  c.push_point(0.1, 0, 0);
  c.push_point(5.0, 0, 0);  // clearly dominant along x
  c.push_point(-3.0, 0, 0);
  GumbelSampler s;
  s.weights = ad::Tensor::param(1, 3, {1.0, 0.0, 0.0}, "w");
  s.zero_noise = true;
  const auto picked = fgnet::gumbel_hard_select(s, c);
  CHECK(picked == std::vector<int>{1});
}

TEST_CASE("duplicate winners fall back to the next-best unused index") {
  PointCloud c;
  c.feature_width = 0;
  c.push_point(0.1, 0, 0);
  c.push_point(5.0, 0, 0);
  c.push_point(3.0, 0, 0);
  GumbelSampler s;
  // identical rows -> identical argmax; zero noise forbids redraw changes
  s.weights = ad::Tensor::param(2, 3, {1.0, 0.0, 0.0, 1.0, 0.0, 0.0}, "w");
  s.zero_noise = true;
  const auto picked = fgnet::gumbel_hard_select(s, c);
  CHECK(picked == std::vector<int>{1, 2});
}

TEST_CASE("hard selection equals an independent scalar recomputation") {
  Rng rng(27);
  PointCloud c = random_cloud(20, 2, rng);
  GumbelSampler s = GumbelSampler::make(4, 2, 11, 1.0);
  const auto picked = fgnet::gumbel_hard_select(s, c);

  std::vector<int> oracle;
  for (int r = 0; r < 4; ++r) {
    // logits, softmax, log, plus the row's round-0 noise, all scalar
    std::vector<double> logit(20);
    for (int i = 0; i < 20; ++i) {
      double acc = 0.0;
      for (int col = 0; col < 5; ++col) {
        const double pv = col < 3 ? c.coords[3 * i + col] : c.features[2 * i + (col - 3)];
        acc += s.weights.at(r, col) * pv;
      }
      logit[i] = acc;
    }
    double mx = logit[0];
    for (double v : logit) mx = std::max(mx, v);
    double z = 0.0;
    for (double v : logit) z += std::exp(v - mx);
    const auto g = fgnet::detail::gumbel_noise_row(s, r, 20, 0);
    int arg = 0;
    double best = -1e300;
    for (int i = 0; i < 20; ++i) {
      const double v = (logit[i] - mx - std::log(z)) + g[i];
      if (v > best) {
        best = v;
        arg = i;
      }
    }
    oracle.push_back(arg);
  }
  // oracle applies no collision policy; valid only when winners are distinct
  std::set<int> uniq(oracle.begin(), oracle.end());
  REQUIRE(uniq.size() == oracle.size());
  CHECK(picked == oracle);
}

TEST_CASE("the point cap triggers a helpful error") {
  GumbelSampler s = GumbelSampler::make(2, 0, 1);
  ad::Tensor big = ad::Tensor::zeros(100001, 3);
  CHECK_THROWS_WITH(fgnet::gumbel_soft_select(s, big),
                    Catch::Matchers::ContainsSubstring("inverse-density"));
}
