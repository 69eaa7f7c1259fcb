// Copyright (c) 2026 fgnet contributors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end gradient verification: analytic gradients of the full
// training objective on a tiny two-stage network against central finite
// differences, for every parameter tensor and the input coordinates.

#ifndef FGNET_TRAIN_GRADCHECK_HPP
#define FGNET_TRAIN_GRADCHECK_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fgnet/net/losses.hpp"
#include "fgnet/net/network.hpp"
#include "fgnet/sample/plan.hpp"

namespace fgnet {

struct GradcheckEntry {
  std::string name;
  double max_rel_err = 0.0;
};

struct GradcheckReport {
  std::vector<GradcheckEntry> entries;
  double worst = 0.0;
  bool pass = false;
  double threshold = 1e-3;
};

namespace detail {

inline double gc_rel_err(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max(1e-6, std::abs(analytic) + std::abs(numeric));
}

}  // namespace detail

/// Build the reference tiny instance: a 32-point random labeled cloud and a
/// reduced-width two-stage network.
inline std::pair<FgNet, PointCloud> gradcheck_instance(std::uint64_t seed) {
  Rng rng(seed);
  PointCloud cloud;
  cloud.feature_width = 1;
  for (int i = 0; i < 32; ++i) {
    cloud.push_point(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
    cloud.features.push_back(rng.uniform(-1.0, 1.0));
    cloud.labels.push_back(static_cast<int>(rng.uniform_index(3)));
  }

  NetworkConfig cfg;
  cfg.stages = 2;
  cfg.bottleneck = 4;
  cfg.widths = {8, 12};
  cfg.neighbor_cap = 4;
  cfg.class_count = 3;
  cfg.rlb_per_stage = 1;
  cfg.kernel_points = 5;
  cfg.input_features = 1;
  cfg.schedule = {12, 5};
  cfg.seed = seed;
  cfg.tau = 0.5;
  FgNet net = FgNet::make(cfg);
  // non-trivial deformations so the kernel losses see realistic geometry
  Rng drng(seed ^ 0x5151);
  for (auto& stage : net.blocks)
    for (auto& block : stage)
      for (auto& v : block.conv.kernel.deform.mutable_values()) v = drng.uniform(-0.02, 0.02);
  return {std::move(net), std::move(cloud)};
}

/// Run the harness. Checks every named parameter plus the level-0
/// coordinate block; threshold 1e-3 end-to-end.
inline GradcheckReport gradcheck_network(std::uint64_t seed, double step = 1e-5) {
  auto [net, cloud] = gradcheck_instance(seed);

  PlanParams pp;
  pp.schedule = net.config.schedule;
  pp.mode = SampleMode::igsam;
  pp.seed = seed + 17;
  const SamplingPlan plan = build_plan(cloud, pp);
  const StageContext ctx = prepare_stages(cloud, plan, net.config);

  ad::Tensor coords = ad::Tensor::param(static_cast<int>(cloud.size()), 3, cloud.coords,
                                        "input.coords");

  auto loss_of = [&]() {
    const ForwardResult fwd = net.forward(ctx, /*training=*/true, &coords);
    return total_loss(net, fwd, cloud.labels).value;
  };

  std::vector<ad::Tensor> leaves = net.parameters();
  leaves.push_back(coords);

  for (auto& leaf : leaves) leaf.zero_grad();
  const ad::Tensor loss = loss_of();
  loss.backward();

  GradcheckReport report;
  for (auto& leaf : leaves) {
    GradcheckEntry entry;
    entry.name = leaf.name();
    for (std::size_t i = 0; i < leaf.count(); ++i) {
      const double saved = leaf.mutable_values()[i];
      leaf.mutable_values()[i] = saved + step;
      const double up = loss_of().item();
      leaf.mutable_values()[i] = saved - step;
      const double dn = loss_of().item();
      leaf.mutable_values()[i] = saved;
      const double numeric = (up - dn) / (2.0 * step);
      entry.max_rel_err =
          std::max(entry.max_rel_err, detail::gc_rel_err(leaf.grad()[i], numeric));
    }
    report.worst = std::max(report.worst, entry.max_rel_err);
    report.entries.push_back(std::move(entry));
  }
  report.pass = report.worst < report.threshold;
  return report;
}

/// Frozen-deformation variant: with the rigid-kernel ablation the
/// deformation receives no gradient at all.
inline bool gradcheck_frozen_deform(std::uint64_t seed) {
  auto [net, cloud] = gradcheck_instance(seed);
  NetworkConfig cfg = net.config;
  cfg.freeze_deform = true;
  FgNet frozen = FgNet::make(cfg);

  PlanParams pp;
  pp.schedule = cfg.schedule;
  pp.mode = SampleMode::igsam;
  pp.seed = seed + 17;
  const StageContext ctx = prepare_stages(cloud, build_plan(cloud, pp), cfg);

  auto params = frozen.parameters();
  for (auto& p : params) p.zero_grad();
  const ForwardResult fwd = frozen.forward(ctx, true);
  total_loss(frozen, fwd, cloud.labels).value.backward();

  for (const auto& stage : frozen.blocks)
    for (const auto& block : stage) {
      if (block.conv.kernel.deform.requires_grad()) return false;
      for (const auto& p : params)
        if (p.name() == block.conv.kernel.deform.name()) return false;
    }
  return true;
}

}  // namespace fgnet

#endif  // FGNET_TRAIN_GRADCHECK_HPP
