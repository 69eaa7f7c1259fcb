// Copyright (c) 2026 fgnet contributors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

#include "fgnet/core/rng.hpp"
#include "fgnet/net/network.hpp"
#include "fgnet/sample/plan.hpp"
#include "gradcheck_util.hpp"

using fgnet::FgNet;
using fgnet::NetworkConfig;
using fgnet::PointCloud;
using fgnet::ResidualBlock;
using fgnet::Rng;
namespace ad = fgnet::ad;

namespace {

PointCloud random_scene(std::size_t n, Rng& rng, int classes = 3) {
  PointCloud c;
  c.feature_width = 1;
  for (std::size_t i = 0; i < n; ++i) {
    c.push_point(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
    c.features.push_back(rng.uniform(-1, 1));
    c.labels.push_back(static_cast<int>(rng.uniform_index(classes)));
  }
  return c;
}

fgnet::StageContext make_ctx(const PointCloud& cloud, const NetworkConfig& cfg,
                             std::uint64_t seed) {
  fgnet::PlanParams pp;
  pp.schedule = cfg.schedule;
  pp.mode = cfg.use_gss ? fgnet::SampleMode::igsam : fgnet::SampleMode::ids;
  pp.seed = seed;
  return fgnet::prepare_stages(cloud, fgnet::build_plan(cloud, pp), cfg);
}

NetworkConfig tiny_config(bool gss = false) {
  NetworkConfig cfg;
  cfg.stages = 2;
  cfg.bottleneck = 4;
  cfg.widths = {8, 12};
  cfg.neighbor_cap = 4;
  cfg.class_count = 3;
  cfg.rlb_per_stage = 1;
  cfg.kernel_points = 5;
  cfg.input_features = 1;
  cfg.schedule = {16, 6};
  cfg.use_gss = gss;
  cfg.seed = 9;
  return cfg;
}

void zero_branch(ResidualBlock& b) {
  for (auto t : {&b.down.weight, &b.down.bias, &b.up.weight, &b.up.bias})
    for (auto& v : t->mutable_values()) v = 0.0;
  for (auto t : {&b.conv.w_ker, &b.conv.w1, &b.conv.w2, &b.conv.proj})
    for (auto& v : t->mutable_values()) v = 0.0;
}

}  // namespace

TEST_CASE("config validation enforces the documented invariants") {
  NetworkConfig cfg = tiny_config();
  cfg.widths = {12, 8};  // decreasing
  CHECK_THROWS_AS(FgNet::make(cfg), std::invalid_argument);
  cfg = tiny_config();
  cfg.stages = 1;
  CHECK_THROWS_AS(FgNet::make(cfg), std::invalid_argument);
  cfg = tiny_config(true);
  cfg.schedule.clear();
  CHECK_THROWS_AS(FgNet::make(cfg), std::invalid_argument);
  cfg = tiny_config();
  cfg.alpha = {1.0};  // wrong length
  CHECK_THROWS_AS(FgNet::make(cfg), std::invalid_argument);
}

TEST_CASE("residual block with a zeroed branch is exactly the skip path") {
  Rng rng(3);
  PointCloud c = random_scene(20, rng);
  fgnet::GridIndex idx(c, 0.4);
  const auto nbrs = fgnet::cap_neighbors(idx.radius_search_all(c, c, 0.4), 4);
  const ad::Tensor coords = ad::Tensor::from_values(20, 3, c.coords);

  SECTION("widths differ: output equals the skip projection") {
    ResidualBlock b = ResidualBlock::make(2, 6, 2, 4, 0.4, 5, "t", {}, 5);
    zero_branch(b);
    const ad::Tensor x =
        ad::Tensor::from_values(20, 2, gradcheck::random_values(40, rng));
    const ad::Tensor out = b.forward(coords, x, nbrs);
    const ad::Tensor skip = b.skip.apply(x);
    REQUIRE(out.count() == skip.count());
    for (std::size_t i = 0; i < out.count(); ++i) CHECK(out.values()[i] == skip.values()[i]);
  }
  SECTION("equal widths: output equals the input") {
    ResidualBlock b = ResidualBlock::make(6, 6, 2, 4, 0.4, 5, "t", {}, 5);
    zero_branch(b);
    REQUIRE_FALSE(b.has_skip);
    const ad::Tensor x =
        ad::Tensor::from_values(20, 6, gradcheck::random_values(120, rng));
    const ad::Tensor out = b.forward(coords, x, nbrs);
    for (std::size_t i = 0; i < out.count(); ++i) CHECK(out.values()[i] == x.values()[i]);
  }
}

TEST_CASE("bottleneck M=8 vs M=1 cuts residual-block parameters at least 9x") {
  NetworkConfig cfg;  // defaults: h=5, widths up to 256, K=16
  cfg.schedule = {1000, 200, 40, 8, 2};
  cfg.use_gss = false;
  cfg.bottleneck = 8;
  FgNet m8 = FgNet::make(cfg);
  cfg.bottleneck = 1;
  FgNet m1 = FgNet::make(cfg);
  const double ratio = static_cast<double>(m1.rlb_parameter_count()) /
                       static_cast<double>(m8.rlb_parameter_count());
  CHECK(ratio >= 9.0);
}

TEST_CASE("encode bookkeeping: zeroed branches pass gathered inputs through") {
  Rng rng(5);
  PointCloud c = random_scene(24, rng);
  NetworkConfig cfg = tiny_config();
  cfg.widths = {1, 1};  // every block identity when zeroed (input width 1)
  cfg.schedule = {8, 3};
  cfg.use_global = false;
  FgNet net = FgNet::make(cfg);
  for (auto& stage : net.blocks)
    for (auto& b : stage) zero_branch(b);

  const auto ctx = make_ctx(c, cfg, 1);
  const auto fwd = net.forward(ctx, false);

  // bottleneck_in must be the raw features gathered through both selections
  REQUIRE(fwd.bottleneck_in.rows() == 3);
  for (int j = 0; j < 3; ++j) {
    const int lvl1 = ctx.plan.indices[1][j];
    const int lvl0 = ctx.plan.indices[0][lvl1];
    CHECK(fwd.bottleneck_in.at(j, 0) == c.features[lvl0]);
  }
  // stage clouds follow the plan exactly
  CHECK(ctx.clouds[0].size() == 24);
  CHECK(ctx.clouds[1].size() == 8);
  CHECK(ctx.clouds[2].size() == 3);
}

TEST_CASE("all-zero input features still produce geometry-driven outputs") {
  Rng rng(7);
  PointCloud c = random_scene(30, rng);
  for (auto& f : c.features) f = 0.0;
  NetworkConfig cfg = tiny_config();
  cfg.schedule = {10, 4};
  FgNet net = FgNet::make(cfg);
  const auto fwd = net.forward(make_ctx(c, cfg, 2), false);
  double mag = 0.0;
  for (const double v : fwd.bottleneck_in.values()) mag += std::abs(v);
  CHECK(mag > 0.0);
}

TEST_CASE("fused logits equal the alpha-weighted stage sum plus the fused head") {
  Rng rng(9);
  PointCloud c = random_scene(26, rng);
  NetworkConfig cfg = tiny_config();
  cfg.schedule = {9, 3};
  cfg.alpha = {0.7, 1.3};
  FgNet net = FgNet::make(cfg);
  const auto fwd = net.forward(make_ctx(c, cfg, 3), false);

  const ad::Tensor extra = net.head_fuse.apply(fwd.decoder_finest);
  for (int i = 0; i < 26; ++i)
    for (int k = 0; k < 3; ++k) {
      const double want = 0.7 * fwd.stage_logits[0].at(i, k) +
                          1.3 * fwd.stage_logits[1].at(i, k) + extra.at(i, k);
      CHECK(fwd.fused_logits.at(i, k) == Catch::Approx(want).margin(1e-12));
    }
}

TEST_CASE("the fused head starts at zero so fresh nets fuse stage logits only") {
  NetworkConfig cfg = tiny_config();
  FgNet net = FgNet::make(cfg);
  for (const double v : net.head_fuse.weight.values()) CHECK(v == 0.0);
  for (const double v : net.head_fuse.bias.values()) CHECK(v == 0.0);
}

TEST_CASE("upsampled stage logits are constant when the coarse rows are constant") {
  Rng rng(11);
  PointCloud c = random_scene(20, rng);
  NetworkConfig cfg = tiny_config();
  cfg.schedule = {7, 3};
  FgNet net = FgNet::make(cfg);
  const auto ctx = make_ctx(c, cfg, 4);
  const auto fwd = net.forward(ctx, false);
  // stage 1 logits at full resolution must copy one of exactly 7 row values
  std::set<long long> distinct;
  for (int i = 0; i < 20; ++i) {
    long long key = 0;
    for (int k = 0; k < 3; ++k)
      key = key * 1000003 + static_cast<long long>(fwd.stage_logits[1].at(i, k) * 1e9);
    distinct.insert(key);
  }
  CHECK(distinct.size() <= 7);
}

TEST_CASE("presence logits match the scalar mean-pool recomputation") {
  Rng rng(13);
  PointCloud c = random_scene(22, rng);
  NetworkConfig cfg = tiny_config();
  cfg.schedule = {8, 3};
  FgNet net = FgNet::make(cfg);
  const auto fwd = net.forward(make_ctx(c, cfg, 5), false);

  const int nb = fwd.bottleneck_out.rows();
  const int L = fwd.bottleneck_out.cols();
  std::vector<double> pooled(L, 0.0);
  for (int r = 0; r < nb; ++r)
    for (int col = 0; col < L; ++col) pooled[col] += fwd.bottleneck_out.at(r, col) / nb;
  for (int k = 0; k < cfg.class_count; ++k) {
    double want = net.presence_head.bias.at(0, k);
    for (int col = 0; col < L; ++col) want += pooled[col] * net.presence_head.weight.at(col, k);
    CHECK(fwd.presence_logits.at(0, k) == Catch::Approx(want).margin(1e-10));
  }
}

TEST_CASE("every ablation switch still yields a runnable network") {
  Rng rng(15);
  PointCloud c = random_scene(28, rng);
  for (int which = 0; which < 5; ++which) {
    NetworkConfig cfg = tiny_config();
    cfg.schedule = {10, 4};
    if (which == 0) cfg.use_pfm = false;
    if (which == 1) cfg.use_gcm = false;
    if (which == 2) cfg.use_ag = false;
    if (which == 3) cfg.use_global = false;
    if (which == 4) cfg.freeze_deform = true;
    FgNet net = FgNet::make(cfg);
    const auto fwd = net.forward(make_ctx(c, cfg, 6), false);
    CHECK(fwd.fused_logits.rows() == 28);
    for (const double v : fwd.fused_logits.values()) CHECK(std::isfinite(v));
  }
}

TEST_CASE("gss training mode uses soft features and hard geometry") {
  Rng rng(17);
  PointCloud c = random_scene(40, rng);
  NetworkConfig cfg = tiny_config(true);
  cfg.schedule = {14, 5};
  FgNet net = FgNet::make(cfg);
  REQUIRE(net.sampler.has_value());

  const auto ctx = make_ctx(c, cfg, 7);
  const auto train_fwd = net.forward(ctx, true);
  CHECK(train_fwd.gss_soft.rows() == 5);
  CHECK(train_fwd.gss_soft.cols() == 14);
  CHECK(train_fwd.final_indices.size() == 5);
  std::set<int> uniq(train_fwd.final_indices.begin(), train_fwd.final_indices.end());
  CHECK(uniq.size() == 5);

  const auto eval_fwd = net.forward(ctx, false);
  CHECK(eval_fwd.gss_soft.count() == 0);
  CHECK(eval_fwd.final_indices == train_fwd.final_indices);  // same noise stream
  // in eval mode the bottleneck rows are hard gathers of the encoder rows
  CHECK(eval_fwd.bottleneck_in.rows() == 5);
}

TEST_CASE("upsample-gather consistency through the plan maps") {
  Rng rng(19);
  PointCloud c = random_scene(30, rng);
  NetworkConfig cfg = tiny_config();
  cfg.schedule = {10, 4};
  const auto ctx = make_ctx(c, cfg, 8);
  // gathering an upsampled row at a coarse point's fine preimage returns
  // exactly the coarse row: upsample[s][selected_fine] == its own coarse slot
  for (std::size_t s = 0; s < 2; ++s) {
    const auto& sel = ctx.plan.indices[s];
    for (std::size_t j = 0; j < sel.size(); ++j)
      CHECK(ctx.plan.upsample[s][sel[j]] == static_cast<int>(j));
  }
}
