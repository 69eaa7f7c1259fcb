// Copyright (c) 2026 fgnet contributors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <vector>

#include "fgnet/net/global_attention.hpp"
#include "gradcheck_util.hpp"

using fgnet::GlobalAttention;
using fgnet::Rng;
namespace ad = fgnet::ad;

TEST_CASE("single-row input doubles itself") {
  Rng rng(1);
  GlobalAttention g = GlobalAttention::make(6, 1, 3);
  const ad::Tensor m =
      ad::Tensor::from_values(1, 6, gradcheck::random_values(6, rng));
  const auto res = fgnet::global_attend_full(g, m);
  CHECK(res.scores.item() == Catch::Approx(1.0).margin(1e-15));
  for (int c = 0; c < 6; ++c)
    CHECK(res.output.at(0, c) == Catch::Approx(2.0 * m.at(0, c)).margin(1e-12));
}

TEST_CASE("zero projections give uniform scores") {
  Rng rng(2);
  const int n = 4, width = 5;
  GlobalAttention g = GlobalAttention::make(width, 1, 9);
  for (auto& v : g.w_g1.mutable_values()) v = 0.0;
  for (auto& v : g.w_g2.mutable_values()) v = 0.0;
  const ad::Tensor m =
      ad::Tensor::from_values(n, width, gradcheck::random_values(n * width, rng));
  const auto res = fgnet::global_attend_full(g, m);
  for (const double s : res.scores.values())
    CHECK(s == Catch::Approx(1.0 / (n * n)).margin(1e-15));
  // M^out = M^in + (1/n^2) * broadcast of the column sums
  for (int c = 0; c < width; ++c) {
    double colsum = 0;
    for (int r = 0; r < n; ++r) colsum += m.at(r, c);
    for (int r = 0; r < n; ++r)
      CHECK(res.output.at(r, c) == Catch::Approx(m.at(r, c) + colsum / (n * n)).margin(1e-12));
  }
}

TEST_CASE("matches a scalar recomputation on a random instance") {
  Rng rng(3);
  const int n = 6, width = 8, cmid = 2;
  GlobalAttention g = GlobalAttention::make(width, cmid, 17);
  const ad::Tensor m =
      ad::Tensor::from_values(n, width, gradcheck::random_values(n * width, rng));
  const auto res = fgnet::global_attend_full(g, m);

  // scalar path
  std::vector<double> m1(n * cmid, 0.0), m2(n * cmid, 0.0);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < cmid; ++c)
      for (int k = 0; k < width; ++k) {
        m1[r * cmid + c] += m.at(r, k) * g.w_g1.at(k, c);
        m2[r * cmid + c] += m.at(r, k) * g.w_g2.at(k, c);
      }
  std::vector<double> rel(n * n, 0.0);
  double mx = -1e300;
  for (int y = 0; y < n; ++y)
    for (int z = 0; z < n; ++z) {
      for (int c = 0; c < cmid; ++c) rel[y * n + z] += m1[y * cmid + c] * m2[z * cmid + c];
      mx = std::max(mx, rel[y * n + z]);
    }
  double zsum = 0.0;
  for (double& v : rel) {
    v = std::exp(v - mx);
    zsum += v;
  }
  for (double& v : rel) v /= zsum;
  for (int y = 0; y < n; ++y)
    for (int c = 0; c < width; ++c) {
      double acc = m.at(y, c);
      for (int z = 0; z < n; ++z) acc += rel[y * n + z] * m.at(z, c);
      CHECK(res.output.at(y, c) == Catch::Approx(acc).margin(1e-10));
    }
}

TEST_CASE("score entries sum to one globally") {
  Rng rng(4);
  GlobalAttention g = GlobalAttention::make(7, 1, 5);
  const ad::Tensor m = ad::Tensor::from_values(9, 7, gradcheck::random_values(63, rng));
  const auto res = fgnet::global_attend_full(g, m);
  const double total =
      std::accumulate(res.scores.values().begin(), res.scores.values().end(), 0.0);
  CHECK(std::abs(total - 1.0) < 1e-9);
}

TEST_CASE("residual identity: output minus input equals scores times input") {
  Rng rng(5);
  GlobalAttention g = GlobalAttention::make(5, 1, 7);
  const ad::Tensor m = ad::Tensor::from_values(4, 5, gradcheck::random_values(20, rng));
  const auto res = fgnet::global_attend_full(g, m);
  const ad::Tensor sm = ad::matmul(res.scores, m);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 5; ++c)
      CHECK(res.output.at(r, c) - m.at(r, c) == Catch::Approx(sm.at(r, c)).margin(1e-12));
}

TEST_CASE("joint permutation equivariance") {
  Rng rng(6);
  const int n = 5, width = 4;
  GlobalAttention g = GlobalAttention::make(width, 1, 11);
  const ad::Tensor m =
      ad::Tensor::from_values(n, width, gradcheck::random_values(n * width, rng));
  const std::vector<int> perm{3, 0, 4, 1, 2};
  const ad::Tensor mp = ad::gather_rows(m, perm);

  const ad::Tensor out = fgnet::global_attend(g, m);
  const ad::Tensor outp = fgnet::global_attend(g, mp);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < width; ++c)
      CHECK(std::abs(outp.at(r, c) - out.at(perm[r], c)) < 1e-12);
}

TEST_CASE("both projection matrices pass gradcheck") {
  Rng rng(7);
  const int n = 5, width = 6;
  GlobalAttention g = GlobalAttention::make(width, 2, 13);
  const ad::Tensor m =
      ad::Tensor::from_values(n, width, gradcheck::random_values(n * width, rng));
  Rng wrng(15);
  const ad::Tensor wgt =
      ad::Tensor::from_values(n, width, gradcheck::random_values(n * width, wrng, 0.5, 1.5));
  auto build = [&] { return ad::sum_all(ad::mul(fgnet::global_attend(g, m), wgt)); };
  CHECK(gradcheck::max_rel_err(build, g.parameters()) < 1e-4);
}

TEST_CASE("row-wise ablation normalizes each row instead") {
  Rng rng(8);
  GlobalAttention g = GlobalAttention::make(4, 1, 19);
  g.rowwise_softmax = true;
  const ad::Tensor m = ad::Tensor::from_values(3, 4, gradcheck::random_values(12, rng));
  const auto res = fgnet::global_attend_full(g, m);
  for (int r = 0; r < 3; ++r) {
    double rowsum = 0;
    for (int c = 0; c < 3; ++c) rowsum += res.scores.at(r, c);
    CHECK(rowsum == Catch::Approx(1.0).margin(1e-12));
  }
}
