// Copyright (c) 2026 fgnet contributors
// SPDX-License-Identifier: Apache-2.0
//
// Training objectives: kernel deformation losses (fit, repulsion,
// containment), multi-stage segmentation cross-entropy, and the scene
// presence loss.

#ifndef FGNET_NET_LOSSES_HPP
#define FGNET_NET_LOSSES_HPP

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "fgnet/ad/tensor.hpp"
#include "fgnet/net/network.hpp"

namespace fgnet {

struct LossReport {
  double fit = 0.0;
  double repulsive = 0.0;
  double contain = 0.0;
  double kernel = 0.0;   // fit + repulsive + contain
  double seg = 0.0;
  double context = 0.0;
  double total = 0.0;    // seg + context + kernel
};

/// Fit loss of one layer application: for every kernel point take the
/// closest neighbor offset, square the paper-normalized distance, sum over
/// kernel points, and average over queries. The minimum selection is fixed
/// from forward values; gradients flow through the selected pairs.
inline ad::Tensor kernel_fit_loss(const KernelSet& kernel, const ad::Tensor& offsets, int cap) {
  const int rows = offsets.rows();  // n * cap
  if (rows == 0 || cap <= 0) return ad::Tensor::filled(1, 1, 0.0);
  const int queries = rows / cap;
  const int ns = kernel.count();

  const ad::Tensor pos = ad::add(kernel.base, kernel.deform);  // Ns x 3
  const ad::Tensor cross = ad::scalar_mul(ad::matmul(offsets, ad::transpose(pos)), -2.0);
  const ad::Tensor off2 = ad::sum_rows(ad::square(offsets));
  const ad::Tensor pos2 = ad::transpose(ad::sum_rows(ad::square(pos)));
  const ad::Tensor d2 = ad::add(ad::add(cross, off2), pos2);   // (n*cap) x Ns

  // argmin over each query's cap rows, per kernel point
  std::vector<int> picks(static_cast<std::size_t>(queries) * ns);
  for (int q = 0; q < queries; ++q)
    for (int i = 0; i < ns; ++i) {
      int arg = q * cap;
      double best = d2.at(q * cap, i);
      for (int k = 1; k < cap; ++k) {
        const double v = d2.at(q * cap + k, i);
        if (v < best) {
          best = v;
          arg = q * cap + k;
        }
      }
      picks[static_cast<std::size_t>(q) * ns + i] = arg * ns + i;  // flat element id
    }

  const ad::Tensor flat = ad::reshape(d2, rows * ns, 1);
  const ad::Tensor chosen = ad::gather_rows(flat, picks);  // (queries*Ns) x 1
  const double denom = kernel.m * kernel.sigma * kernel.sigma;
  return ad::scalar_mul(ad::sum_all(chosen), 1.0 / (denom * denom) / queries);
}

/// Repulsion between every ordered pair of deformed kernel points:
/// sum 1 / (distance + 1e-6).
inline ad::Tensor kernel_repulsive_loss(const KernelSet& kernel) {
  const int ns = kernel.count();
  if (ns < 2) return ad::Tensor::filled(1, 1, 0.0);
  std::vector<int> lhs, rhs;
  lhs.reserve(static_cast<std::size_t>(ns) * (ns - 1));
  rhs.reserve(lhs.capacity());
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < ns; ++j)
      if (i != j) {
        lhs.push_back(i);
        rhs.push_back(j);
      }
  const ad::Tensor pos = ad::add(kernel.base, kernel.deform);
  const ad::Tensor diff = ad::sub(ad::gather_rows(pos, lhs), ad::gather_rows(pos, rhs));
  const ad::Tensor dist = ad::norm_rows(diff);
  return ad::sum_all(ad::reciprocal(dist, 1e-6));
}

/// Containment: squared norms of the deformed positions.
inline ad::Tensor kernel_contain_loss(const KernelSet& kernel) {
  return ad::sum_all(ad::square(ad::add(kernel.base, kernel.deform)));
}

/// Cross-entropy of one logits matrix (n x C) against integer labels,
/// averaged over the points.
inline ad::Tensor cross_entropy(const ad::Tensor& logits, const std::vector<int>& labels) {
  const int n = logits.rows();
  const int c = logits.cols();
  if (static_cast<int>(labels.size()) != n)
    throw std::invalid_argument("cross entropy: " + std::to_string(labels.size()) +
                                " labels for " + std::to_string(n) + " rows");
  std::vector<double> mask(static_cast<std::size_t>(n) * c, 0.0);
  for (int i = 0; i < n; ++i) {
    if (labels[i] < 0 || labels[i] >= c)
      throw std::invalid_argument("cross entropy: label " + std::to_string(labels[i]) +
                                  " out of range at point " + std::to_string(i));
    mask[static_cast<std::size_t>(i) * c + labels[i]] = 1.0;
  }
  const ad::Tensor probs = ad::softmax_rows(logits);
  const ad::Tensor picked = ad::mul(ad::log_(probs, 1e-12),
                                    ad::Tensor::from_values(n, c, std::move(mask)));
  return ad::scalar_mul(ad::sum_all(picked), -1.0 / n);
}

/// Stage-weighted segmentation loss: sum_h alpha_h CE(stage logits) +
/// beta CE(fused logits); every logits matrix is at full resolution.
inline ad::Tensor seg_loss(const std::vector<ad::Tensor>& stage_logits,
                           const ad::Tensor& fused_logits, const std::vector<int>& labels,
                           const std::vector<double>& alpha, double beta) {
  if (stage_logits.size() != alpha.size())
    throw std::invalid_argument("seg loss: alpha size does not match stage count");
  ad::Tensor total = ad::scalar_mul(cross_entropy(fused_logits, labels), beta);
  for (std::size_t s = 0; s < stage_logits.size(); ++s)
    total = ad::add(total, ad::scalar_mul(cross_entropy(stage_logits[s], labels), alpha[s]));
  return total;
}

/// Multi-label presence loss: mean sigmoid binary cross-entropy over classes.
inline ad::Tensor context_loss(const ad::Tensor& presence_logits,
                               const std::vector<double>& targets) {
  const int c = presence_logits.cols();
  if (presence_logits.rows() != 1 || static_cast<int>(targets.size()) != c)
    throw std::invalid_argument("context loss: logits must be 1 x classes with matching targets");
  const ad::Tensor t = ad::Tensor::from_values(1, c, targets);
  const ad::Tensor ones = ad::Tensor::filled(1, c, 1.0);
  const ad::Tensor sig =
      ad::reciprocal(ad::add_scalar(ad::exp_(ad::scalar_mul(presence_logits, -1.0)), 1.0));
  const ad::Tensor pos = ad::mul(t, ad::log_(sig, 1e-12));
  const ad::Tensor neg = ad::mul(ad::sub(ones, t), ad::log_(ad::sub(ones, sig), 1e-12));
  return ad::scalar_mul(ad::sum_all(ad::add(pos, neg)), -1.0 / c);
}

/// Presence targets derived from the labels: class present in scene -> 1.
inline std::vector<double> presence_targets(const std::vector<int>& labels, int classes) {
  std::vector<double> t(classes, 0.0);
  for (int l : labels)
    if (l >= 0 && l < classes) t[l] = 1.0;
  return t;
}

/// Assemble the full objective for one forward pass.
struct TotalLoss {
  ad::Tensor value;   // scalar graph node
  LossReport report;  // forward values of each component
};

inline TotalLoss total_loss(const FgNet& net, const ForwardResult& fwd,
                            const std::vector<int>& labels) {
  TotalLoss out;
  const auto& cfg = net.config;

  ad::Tensor seg = seg_loss(fwd.stage_logits, fwd.fused_logits, labels, cfg.alpha, cfg.beta);
  out.report.seg = seg.item();
  ad::Tensor total = seg;

  if (cfg.use_context_loss) {
    const ad::Tensor ctx =
        context_loss(fwd.presence_logits, presence_targets(labels, cfg.presence_classes));
    out.report.context = ctx.item();
    total = ad::add(total, ctx);
  }

  if (cfg.use_gcm) {
    ad::Tensor fit = ad::Tensor::filled(1, 1, 0.0);
    for (const auto& ki : fwd.kernel_inputs)
      fit = ad::add(fit, kernel_fit_loss(*ki.kernel, ki.offsets, ki.cap));
    ad::Tensor rep = ad::Tensor::filled(1, 1, 0.0);
    ad::Tensor con = ad::Tensor::filled(1, 1, 0.0);
    for (const auto& stage : net.blocks)
      for (const auto& block : stage) {
        rep = ad::add(rep, kernel_repulsive_loss(block.conv.kernel));
        con = ad::add(con, kernel_contain_loss(block.conv.kernel));
      }
    out.report.fit = fit.item();
    out.report.repulsive = rep.item();
    out.report.contain = con.item();
    out.report.kernel = out.report.fit + out.report.repulsive + out.report.contain;
    total = ad::add(total, ad::add(fit, ad::add(rep, con)));
  }

  out.report.total = total.item();
  out.value = total;
  return out;
}

}  // namespace fgnet

#endif  // FGNET_NET_LOSSES_HPP
