// Copyright (c) 2026 fgnet contributors
// SPDX-License-Identifier: Apache-2.0
//
// FG-Net assembly: bottlenecked residual encoder over the sampling pyramid,
// non-local attention at the coarsest stage, interpolation decoder, and
// per-stage segmentation heads fused at full resolution.

#ifndef FGNET_NET_NETWORK_HPP
#define FGNET_NET_NETWORK_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fgnet/ad/tensor.hpp"
#include "fgnet/conv/fg_conv.hpp"
#include "fgnet/core/grid_index.hpp"
#include "fgnet/core/point_cloud.hpp"
#include "fgnet/net/global_attention.hpp"
#include "fgnet/sample/plan.hpp"

namespace fgnet {

/// 1x1 convolution: per-row linear map with bias.
struct Linear {
  ad::Tensor weight;  // in x out
  ad::Tensor bias;    // 1 x out

  static Linear make(int in, int out, std::uint64_t seed, const std::string& name,
                     bool zero_init = false) {
    Linear l;
    std::vector<double> w(static_cast<std::size_t>(in) * out, 0.0);
    if (!zero_init) {
      Rng rng(seed);
      const double scale = 1.0 / std::sqrt(in);
      for (auto& x : w) x = rng.uniform(-scale, scale);
    }
    l.weight = ad::Tensor::param(in, out, std::move(w), name + ".weight");
    l.bias = ad::Tensor::param(1, out, std::vector<double>(out, 0.0), name + ".bias");
    return l;
  }

  ad::Tensor apply(const ad::Tensor& x) const { return ad::add(ad::matmul(x, weight), bias); }

  std::size_t parameter_count() const { return weight.count() + bias.count(); }
};

/// Bottlenecked residual learning block: 1x1 down-projection to
/// D_out / M, FG-Conv at the reduced width, 1x1 up-projection, skip add
/// (with a 1x1 skip projection when the widths differ).
struct ResidualBlock {
  Linear down;
  FgConvLayer conv;
  Linear up;
  bool has_skip = false;
  Linear skip;
  int d_in = 0, d_out = 0;

  static ResidualBlock make(int d_in, int d_out, int bottleneck, int cap, double radius,
                            std::uint64_t seed, const std::string& name,
                            const FgConvOptions& opts, int kernel_points) {
    ResidualBlock b;
    b.d_in = d_in;
    b.d_out = d_out;
    const int mid = std::max(1, (d_out + bottleneck - 1) / bottleneck);
    b.down = Linear::make(d_in, mid, seed * 31 + 1, name + ".down");
    b.conv = FgConvLayer::make(mid, mid, cap, radius, seed * 31 + 2, name + ".conv", opts,
                               kernel_points);
    b.up = Linear::make(mid, d_out, seed * 31 + 3, name + ".up");
    b.has_skip = d_in != d_out;
    if (b.has_skip) b.skip = Linear::make(d_in, d_out, seed * 31 + 4, name + ".skip");
    return b;
  }

  ad::Tensor forward(const ad::Tensor& coords, const ad::Tensor& features,
                     const CappedNeighbors& nbrs, ad::Tensor* offsets_out = nullptr) const {
    const ad::Tensor t = ad::relu(down.apply(features));
    const ad::Tensor c = fg_conv_forward(conv, coords, t, nbrs, offsets_out);
    const ad::Tensor branch = up.apply(ad::relu(c));
    const ad::Tensor s = has_skip ? skip.apply(features) : features;
    return ad::add(branch, s);
  }

  std::vector<ad::Tensor> parameters() const {
    std::vector<ad::Tensor> out{down.weight, down.bias};
    for (const auto& t : conv.parameters()) out.push_back(t);
    out.push_back(up.weight);
    out.push_back(up.bias);
    if (has_skip) {
      out.push_back(skip.weight);
      out.push_back(skip.bias);
    }
    return out;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& t : parameters()) n += t.count();
    return n;
  }
};

struct NetworkConfig {
  int stages = 5;               // h
  int bottleneck = 8;           // M
  std::vector<int> widths;      // per-stage output widths; default ends at 256
  std::vector<double> radii;    // per-stage query radii; empty = auto
  int neighbor_cap = 16;        // K
  int class_count = 3;          // segmentation classes
  int presence_classes = 0;     // 0 = same as class_count
  std::vector<double> alpha;    // per-stage loss weights; empty = all 1
  double beta = 1.0;
  int rlb_per_stage = 2;
  int kernel_points = 15;
  int input_features = 1;
  std::vector<std::size_t> schedule;  // per-stage counts; required when use_gss
  bool use_pfm = true;
  bool use_gcm = true;
  bool use_ag = true;
  bool use_global = true;
  bool use_gss = true;
  bool use_context_loss = true;
  bool freeze_deform = false;
  bool rowwise_softmax = false;
  double tau = 1.0;             // GSS temperature; annealed by the trainer
  std::uint64_t seed = 0;

  void finalize() {
    if (stages < 2) throw std::invalid_argument("network: need at least two stages");
    if (bottleneck < 1) throw std::invalid_argument("network: bottleneck divisor must be >= 1");
    if (widths.empty()) {
      static const int defaults[] = {32, 64, 128, 192, 256};
      if (stages <= 5) {
        widths.assign(defaults + (5 - stages), defaults + 5);
      } else {
        widths.assign(stages, 256);
        for (int i = 0; i < 5; ++i) widths[i] = defaults[i];
      }
    }
    if (static_cast<int>(widths.size()) != stages)
      throw std::invalid_argument("network: widths list must have one entry per stage");
    for (std::size_t i = 1; i < widths.size(); ++i)
      if (widths[i] < widths[i - 1])
        throw std::invalid_argument("network: widths must be non-decreasing");
    if (alpha.empty()) alpha.assign(stages, 1.0);
    if (static_cast<int>(alpha.size()) != stages)
      throw std::invalid_argument("network: alpha list must have one entry per stage");
    if (presence_classes <= 0) presence_classes = class_count;
    if (!radii.empty() && static_cast<int>(radii.size()) != stages)
      throw std::invalid_argument("network: radii list must have one entry per stage");
    if (use_gss && schedule.empty())
      throw std::invalid_argument("network: learnable sampling needs an explicit schedule");
    if (!schedule.empty() && static_cast<int>(schedule.size()) != stages)
      throw std::invalid_argument("network: schedule must have one entry per stage");
  }
};

/// Geometry prepared once per batch (loader side): level clouds, fixed-K
/// neighborhoods, and the index maps the decoder needs.
struct StageContext {
  SamplingPlan plan;
  std::vector<PointCloud> clouds;           // stages + 1 levels
  std::vector<CappedNeighbors> nbrs;        // one per level 0..stages-1
  std::vector<std::vector<int>> full_maps;  // level -> (full point -> level id)
  std::vector<std::vector<int>> level_ids;  // level -> ids into the input cloud
  std::vector<double> radii;
};

inline StageContext prepare_stages(const PointCloud& cloud, const SamplingPlan& plan,
                                   const NetworkConfig& config) {
  if (static_cast<int>(plan.stages()) != config.stages)
    throw std::invalid_argument("network: plan has " + std::to_string(plan.stages()) +
                                " stages, config wants " + std::to_string(config.stages));
  StageContext ctx;
  ctx.plan = plan;
  ctx.clouds.push_back(cloud);
  for (int s = 0; s < config.stages; ++s)
    ctx.clouds.push_back(ctx.clouds.back().subset(plan.indices[s]));

  ctx.radii = config.radii;
  if (ctx.radii.empty()) {
    const double base = 2.5 * detail::estimate_spacing(cloud);
    ctx.radii.resize(config.stages);
    for (int s = 0; s < config.stages; ++s) ctx.radii[s] = base * std::pow(2.0, s);
  }

  for (int s = 0; s < config.stages; ++s) {
    const PointCloud& c = ctx.clouds[s];
    GridIndex idx(c, ctx.radii[s]);
    ctx.nbrs.push_back(cap_neighbors(idx.radius_search_all(c, c, ctx.radii[s]),
                                     config.neighbor_cap));
  }

  const std::size_t n0 = cloud.size();
  std::vector<int> map(n0);
  for (std::size_t i = 0; i < n0; ++i) map[i] = static_cast<int>(i);
  ctx.full_maps.push_back(map);
  for (int s = 0; s + 1 < config.stages; ++s) {
    for (std::size_t i = 0; i < n0; ++i) map[i] = plan.upsample[s][map[i]];
    ctx.full_maps.push_back(map);
  }

  std::vector<int> ids(n0);
  for (std::size_t i = 0; i < n0; ++i) ids[i] = static_cast<int>(i);
  ctx.level_ids.push_back(ids);
  for (int s = 0; s < config.stages; ++s) {
    std::vector<int> next(plan.indices[s].size());
    for (std::size_t j = 0; j < next.size(); ++j) next[j] = ids[plan.indices[s][j]];
    ctx.level_ids.push_back(next);
    ids = ctx.level_ids.back();
  }
  return ctx;
}

/// Per-layer kernel data the deformation losses consume.
struct KernelLossInput {
  const KernelSet* kernel;
  ad::Tensor offsets;  // (n*K) x 3 neighbor offsets of that layer application
  int cap;
};

struct ForwardResult {
  std::vector<ad::Tensor> stage_logits;  // per level, already at full resolution
  ad::Tensor fused_logits;
  ad::Tensor bottleneck_in;
  ad::Tensor bottleneck_out;
  ad::Tensor presence_logits;
  ad::Tensor decoder_finest;
  std::vector<KernelLossInput> kernel_inputs;
  std::vector<int> final_indices;        // realized coarsest-level selection
  ad::Tensor gss_soft;                   // soft selection matrix when trained with GSS
};

class FgNet {
 public:
  NetworkConfig config;
  std::vector<std::vector<ResidualBlock>> blocks;  // [stage][rlb]
  GlobalAttention global;
  std::optional<GumbelSampler> sampler;
  std::vector<Linear> decoders;  // per level 0..h-1
  std::vector<Linear> heads;     // per level 0..h-1
  Linear head_fuse;              // fresh fused head on the finest decoder features
  Linear presence_head;

  static FgNet make(NetworkConfig cfg) {
    cfg.finalize();
    FgNet net;
    net.config = cfg;
    FgConvOptions opts;
    opts.use_pfm = cfg.use_pfm;
    opts.use_gcm = cfg.use_gcm;
    opts.use_ag = cfg.use_ag;
    opts.freeze_deform = cfg.freeze_deform;

    // radii for kernel construction; queries may still override at prepare time
    std::vector<double> radii = cfg.radii;
    if (radii.empty()) {
      radii.resize(cfg.stages);
      for (int s = 0; s < cfg.stages; ++s) radii[s] = 0.1 * std::pow(2.0, s);
    }

    for (int s = 0; s < cfg.stages; ++s) {
      std::vector<ResidualBlock> stage;
      for (int b = 0; b < cfg.rlb_per_stage; ++b) {
        const int d_in = b == 0 ? (s == 0 ? cfg.input_features : cfg.widths[s - 1])
                                : cfg.widths[s];
        const std::string name = "stage" + std::to_string(s) + ".rlb" + std::to_string(b);
        stage.push_back(ResidualBlock::make(d_in, cfg.widths[s], cfg.bottleneck,
                                            cfg.neighbor_cap, radii[s],
                                            cfg.seed + 1000 * s + 10 * b, name, opts,
                                            cfg.kernel_points));
      }
      net.blocks.push_back(std::move(stage));
    }

    const int L = cfg.widths.back();
    net.global = GlobalAttention::make(L, 1, cfg.seed + 77001);
    net.global.rowwise_softmax = cfg.rowwise_softmax;

    if (cfg.use_gss) {
      const int n_sel = static_cast<int>(cfg.schedule.back());
      net.sampler = GumbelSampler::make(n_sel, L, cfg.seed + 88001, cfg.tau);
    }

    for (int s = 0; s < cfg.stages; ++s) {
      const int upper = s + 1 == cfg.stages ? L : cfg.widths[s + 1];
      net.decoders.push_back(Linear::make(upper + cfg.widths[s], cfg.widths[s],
                                          cfg.seed + 55000 + s, "dec" + std::to_string(s)));
      net.heads.push_back(Linear::make(cfg.widths[s], cfg.class_count, cfg.seed + 66000 + s,
                                       "head" + std::to_string(s)));
    }
    net.head_fuse = Linear::make(cfg.widths[0], cfg.class_count, cfg.seed + 67000, "head_fuse",
                                 /*zero_init=*/true);
    net.presence_head = Linear::make(L, cfg.presence_classes, cfg.seed + 68000, "presence");
    return net;
  }

  std::vector<ad::Tensor> parameters() const {
    std::vector<ad::Tensor> out;
    for (const auto& stage : blocks)
      for (const auto& b : stage)
        for (const auto& t : b.parameters()) out.push_back(t);
    if (config.use_global)
      for (const auto& t : global.parameters()) out.push_back(t);
    if (sampler) out.push_back(sampler->weights);
    for (const auto& l : decoders) {
      out.push_back(l.weight);
      out.push_back(l.bias);
    }
    for (const auto& l : heads) {
      out.push_back(l.weight);
      out.push_back(l.bias);
    }
    out.push_back(head_fuse.weight);
    out.push_back(head_fuse.bias);
    out.push_back(presence_head.weight);
    out.push_back(presence_head.bias);
    return out;
  }

  std::size_t rlb_parameter_count() const {
    std::size_t n = 0;
    for (const auto& stage : blocks)
      for (const auto& b : stage) n += b.parameter_count();
    return n;
  }

  /// Full forward pass. In training mode with learnable sampling, the
  /// coarsest selection is redrawn from the Gumbel stream (hard indices fix
  /// the geometry; the soft path carries the sampler gradients).
  ///
  /// `coords0` / `feats0` optionally replace the level-0 inputs with live
  /// tensors so gradients can flow to them; the neighborhood structure
  /// stays frozen in `ctx` either way.
  ForwardResult forward(const StageContext& ctx, bool training,
                        const ad::Tensor* coords0 = nullptr,
                        const ad::Tensor* feats0 = nullptr) const {
    const int h = config.stages;
    ForwardResult res;

    ad::Tensor feats =
        feats0 ? *feats0
               : ad::Tensor::from_values(static_cast<int>(ctx.clouds[0].size()),
                                         config.input_features, ctx.clouds[0].features);
    std::vector<ad::Tensor> enc(h);
    std::vector<ad::Tensor> coords(h + 1);
    for (int s = 0; s <= h; ++s) {
      if (coords0)
        coords[s] = s == 0 ? *coords0 : ad::gather_rows(*coords0, ctx.level_ids[s]);
      else
        coords[s] = ad::Tensor::from_values(static_cast<int>(ctx.clouds[s].size()), 3,
                                            ctx.clouds[s].coords);
    }

    std::vector<int> final_ids = ctx.plan.indices.back();
    std::vector<int> final_upsample = ctx.plan.upsample.back();
    ad::Tensor bottleneck_in;

    for (int s = 0; s < h; ++s) {
      for (const auto& block : blocks[s]) {
        ad::Tensor offsets;
        feats = block.forward(coords[s], feats, ctx.nbrs[s],
                              config.use_gcm ? &offsets : nullptr);
        if (config.use_gcm)
          res.kernel_inputs.push_back({&block.conv.kernel, offsets, ctx.nbrs[s].cap});
      }
      enc[s] = feats;
      // indices[s] selects the level-(s+1) cloud out of level s
      if (s + 1 < h) feats = ad::gather_rows(feats, ctx.plan.indices[s]);
    }

    // transition to the bottleneck level
    if (config.use_gss && sampler) {
      const ad::Tensor P = ad::concat_cols(coords[h - 1], enc[h - 1]);
      final_ids = gumbel_hard_select(*sampler, P);
      if (training) {
        const auto [soft, soft_pts] = gumbel_soft_select(*sampler, P);
        res.gss_soft = soft;
        bottleneck_in = ad::matmul(soft, enc[h - 1]);  // soft features, hard geometry
      } else {
        bottleneck_in = ad::gather_rows(enc[h - 1], final_ids);
      }
      // refresh the coarsest correspondence map for the realized selection
      const PointCloud coarse = ctx.clouds[h - 1].subset(final_ids);
      final_upsample = nearest_map(ctx.clouds[h - 1], coarse);
    } else {
      bottleneck_in = ad::gather_rows(enc[h - 1], ctx.plan.indices[h - 1]);
    }
    res.final_indices = final_ids;
    res.bottleneck_in = bottleneck_in;
    res.bottleneck_out = config.use_global ? global_attend(global, bottleneck_in) : bottleneck_in;

    // decoder: nearest-coarse copies, skip concatenation, per-level heads
    ad::Tensor dec = res.bottleneck_out;
    std::vector<ad::Tensor> level_logits(h);
    for (int s = h - 1; s >= 0; --s) {
      const std::vector<int>& up_map = s == h - 1 ? final_upsample : ctx.plan.upsample[s];
      const ad::Tensor up = ad::gather_rows(dec, up_map);
      dec = ad::relu(decoders[s].apply(ad::concat_cols(up, enc[s])));
      level_logits[s] = heads[s].apply(dec);
    }
    res.decoder_finest = dec;

    res.stage_logits.resize(h);
    for (int s = 0; s < h; ++s)
      res.stage_logits[s] =
          s == 0 ? level_logits[0] : ad::gather_rows(level_logits[s], ctx.full_maps[s]);

    ad::Tensor fused = ad::scalar_mul(res.stage_logits[0], config.alpha[0]);
    for (int s = 1; s < h; ++s)
      fused = ad::add(fused, ad::scalar_mul(res.stage_logits[s], config.alpha[s]));
    res.fused_logits = ad::add(fused, head_fuse.apply(dec));

    // scene-level presence logits from the mean-pooled bottleneck
    const int nb = res.bottleneck_out.rows();
    const ad::Tensor pooled = ad::scalar_mul(ad::sum_cols(res.bottleneck_out), 1.0 / nb);
    res.presence_logits = presence_head.apply(pooled);
    return res;
  }

 private:
  /// Nearest-coarse-point ids for every fine point; (distance, id) order.
  static std::vector<int> nearest_map(const PointCloud& fine, const PointCloud& coarse) {
    std::vector<int> out(fine.size(), 0);
    for (std::size_t i = 0; i < fine.size(); ++i) {
      double best = 1e300;
      int arg = 0;
      for (std::size_t j = 0; j < coarse.size(); ++j) {
        const double d2 = squared_distance(fine.point_ptr(i), coarse.point_ptr(j));
        if (d2 < best) {
          best = d2;
          arg = static_cast<int>(j);
        }
      }
      out[i] = arg;
    }
    return out;
  }
};

}  // namespace fgnet

#endif  // FGNET_NET_NETWORK_HPP
