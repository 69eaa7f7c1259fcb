// Copyright (c) 2026 fgnet contributors
// SPDX-License-Identifier: Apache-2.0
//
// The FG-Conv block: pointwise correlated feature mining (PFM), geometric
// convolutional modelling with deformable kernel points (GCM), and channel
// attention over the fused branches (AG).

#ifndef FGNET_CONV_FG_CONV_HPP
#define FGNET_CONV_FG_CONV_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fgnet/ad/tensor.hpp"
#include "fgnet/conv/kernel_points.hpp"
#include "fgnet/core/grid_index.hpp"
#include "fgnet/core/rng.hpp"

namespace fgnet {

/// Fixed-size neighborhoods: radius lists truncated to the K nearest and
/// padded by repeating the query point when fewer are available.
struct CappedNeighbors {
  int cap = 0;
  std::vector<int> flat_ids;    // n * cap neighbor ids
  std::vector<int> query_ids;   // n * cap owning query ids (i repeated cap times)

  std::size_t queries() const { return cap == 0 ? 0 : flat_ids.size() / cap; }
};

inline CappedNeighbors cap_neighbors(const NeighborList& lists, int cap) {
  CappedNeighbors out;
  out.cap = cap;
  out.flat_ids.resize(lists.query_count * cap);
  out.query_ids.resize(lists.query_count * cap);
  for (std::size_t q = 0; q < lists.query_count; ++q) {
    const std::size_t have = lists.count(q);
    for (int k = 0; k < cap; ++k) {
      const std::size_t at = q * cap + k;
      out.flat_ids[at] = k < static_cast<int>(have) ? lists.ids(q)[k] : static_cast<int>(q);
      out.query_ids[at] = static_cast<int>(q);
    }
  }
  return out;
}

struct FgConvOptions {
  bool use_pfm = true;
  bool use_gcm = true;
  bool use_ag = true;
  bool freeze_deform = false;  // rigid-kernel ablation: deformation stays 0
};

/// One FG-Conv layer. Widths follow the block's bookkeeping:
/// f_mid = 6 + 2 f_in, f_int = branches * f_mid.
struct FgConvLayer {
  KernelSet kernel;
  ad::Tensor w_ker;  // (3 + f_in) x f_mid
  ad::Tensor w1;     // cap x cap
  ad::Tensor w2;     // 1 x cap
  ad::Tensor proj;   // f_int x f_out
  int f_in = 0;
  int f_mid = 0;
  int f_int = 0;
  int f_out = 0;
  int cap = 0;
  FgConvOptions opts;

  static FgConvLayer make(int f_in, int f_out, int cap, double radius, std::uint64_t seed,
                          const std::string& name, FgConvOptions opts = {},
                          int kernel_points = 15) {
    if (!opts.use_pfm && !opts.use_gcm)
      throw std::invalid_argument("fg-conv: at least one of PFM/GCM must stay enabled");
    FgConvLayer l;
    l.f_in = f_in;
    l.f_mid = 6 + 2 * f_in;
    l.f_int = (static_cast<int>(opts.use_pfm) + static_cast<int>(opts.use_gcm)) * l.f_mid;
    l.f_out = f_out;
    l.cap = cap;
    l.opts = opts;
    l.kernel = make_kernel_set(kernel_points, radius, seed ^ 0xC0FFEE, name + ".kernel",
                               !opts.freeze_deform);
    Rng rng(seed);
    auto init = [&rng](int r, int c, double scale) {
      std::vector<double> v(static_cast<std::size_t>(r) * c);
      for (auto& x : v) x = rng.uniform(-scale, scale);
      return v;
    };
    const int width = 3 + f_in;
    l.w_ker = ad::Tensor::param(width, l.f_mid, init(width, l.f_mid, 1.0 / std::sqrt(width)),
                                name + ".w_ker");
    l.w1 = ad::Tensor::param(cap, cap, init(cap, cap, 1.0 / std::sqrt(cap)), name + ".w1");
    l.w2 = ad::Tensor::param(1, cap, init(1, cap, 1.0 / std::sqrt(cap)), name + ".w2");
    l.proj = ad::Tensor::param(l.f_int, f_out, init(l.f_int, f_out, 1.0 / std::sqrt(l.f_int)),
                               name + ".proj");
    return l;
  }

  std::vector<ad::Tensor> parameters() const {
    std::vector<ad::Tensor> out;
    if (opts.use_gcm && !opts.freeze_deform) out.push_back(kernel.deform);
    if (opts.use_gcm) out.push_back(w_ker);
    if (opts.use_pfm) out.push_back(w1);
    if (opts.use_ag) out.push_back(w2);
    out.push_back(proj);
    return out;
  }
};

// ---- single-query operations (the reference path; also used by diagnostics)

/// PFM for one query: cosine similarity against each neighbor row, the
/// learnt softmax re-weighting, and concatenation with the raw rows.
/// `query` is 1 x (3+f), `neighbors` is K x (3+f).
inline ad::Tensor pfm(const ad::Tensor& query, const ad::Tensor& neighbors, const ad::Tensor& w1) {
  const int K = neighbors.rows();
  const ad::Tensor dot = ad::matmul(neighbors, ad::transpose(query));       // K x 1
  const ad::Tensor norms = ad::mul(ad::norm_rows(neighbors), ad::norm_rows(query));
  const ad::Tensor g = ad::mul(dot, ad::reciprocal(norms, 1e-12));          // K x 1
  const ad::Tensor z =
      ad::reshape(ad::softmax_rows(ad::reshape(ad::matmul(w1, g), 1, K)), K, 1);
  const ad::Tensor weighted = ad::mul(neighbors, z);                        // row-wise scaling
  return ad::concat_cols(weighted, neighbors);                              // K x f_mid
}

/// Summed Gaussian correlation of all kernel points against each neighbor
/// offset; K x 1. Deformed positions enter the correlation.
inline ad::Tensor correlation_sums(const KernelSet& kernel, const ad::Tensor& offsets) {
  const ad::Tensor pos = ad::add(kernel.base, kernel.deform);               // Ns x 3
  const ad::Tensor cross = ad::scalar_mul(ad::matmul(offsets, ad::transpose(pos)), -2.0);
  const ad::Tensor off2 = ad::sum_rows(ad::square(offsets));                // K x 1
  const ad::Tensor pos2 = ad::transpose(ad::sum_rows(ad::square(pos)));     // 1 x Ns
  const ad::Tensor d2 = ad::add(ad::add(cross, off2), pos2);
  const double denom = kernel.m * kernel.sigma * kernel.sigma;
  return ad::scalar_mul(ad::sum_rows(ad::exp_(ad::scalar_mul(d2, -1.0 / denom))),
                        1.0 / kernel.count());
}

/// GCM for one query: neighbor rows transformed through w_ker and scaled by
/// their summed kernel correlations. `query_xyz` is 1 x 3; `neighbors` holds
/// the full (3+f) rows whose first three columns are coordinates.
inline ad::Tensor gcm(const ad::Tensor& query_xyz, const ad::Tensor& neighbor_xyz,
                      const ad::Tensor& neighbors, const KernelSet& kernel,
                      const ad::Tensor& w_ker) {
  const ad::Tensor offsets = ad::sub(neighbor_xyz, query_xyz);              // K x 3
  const ad::Tensor corr = correlation_sums(kernel, offsets);                // K x 1
  return ad::mul(ad::matmul(neighbors, w_ker), corr);                       // K x f_mid
}

/// AG for one query: channel attention over the fused branch rows followed
/// by the output projection. Returns 1 x f_out.
inline ad::Tensor ag(const ad::Tensor& branch_rows, const ad::Tensor& w2,
                     const ad::Tensor& proj) {
  const ad::Tensor logits = ad::matmul(w2, branch_rows);  // 1 x f_int
  const ad::Tensor fa = ad::softmax_rows(logits);
  const ad::Tensor fh = ad::sum_cols(branch_rows);        // 1 x f_int
  const ad::Tensor fc = ad::mul(fa, fh);
  return ad::matmul(ad::add(fh, fc), proj);
}

// ---- batched forward over a whole stage cloud

/// FG-Conv applied to every query of a stage. `coords` is n x 3, `features`
/// n x f_in; `nbrs` supplies the fixed-K neighborhoods. Returns n x f_out.
/// The computation is the single-query pipeline vectorized through flat
/// (n*K)-row tensors; per-point results are bit-identical to the reference.
/// When `offsets_out` is given it receives the (n*K) x 3 neighbor offsets
/// (inputs of the kernel deformation losses).
inline ad::Tensor fg_conv_forward(const FgConvLayer& layer, const ad::Tensor& coords,
                                  const ad::Tensor& features, const CappedNeighbors& nbrs,
                                  ad::Tensor* offsets_out = nullptr) {
  const int n = coords.rows();
  const int K = nbrs.cap;
  if (static_cast<std::size_t>(n) != nbrs.queries())
    throw std::invalid_argument("fg-conv: neighborhood table does not match the cloud");
  if (features.cols() != layer.f_in)
    throw std::invalid_argument("fg-conv: feature width " + std::to_string(features.cols()) +
                                " does not match layer f_in " + std::to_string(layer.f_in));

  const ad::Tensor P = ad::concat_cols(coords, features);                 // n x (3+f)
  const ad::Tensor Pk = ad::gather_rows(P, nbrs.flat_ids);                // (nK) x (3+f)
  const ad::Tensor Pi = ad::gather_rows(P, nbrs.query_ids);

  ad::Tensor f1, f2;
  if (layer.opts.use_pfm) {
    const ad::Tensor dot = ad::sum_rows(ad::mul(Pk, Pi));                 // (nK) x 1
    const ad::Tensor norms = ad::mul(ad::norm_rows(Pk), ad::norm_rows(Pi));
    const ad::Tensor g = ad::mul(dot, ad::reciprocal(norms, 1e-12));
    const ad::Tensor R = ad::reshape(g, n, K);
    const ad::Tensor Z = ad::softmax_rows(ad::matmul(R, ad::transpose(layer.w1)));
    const ad::Tensor zf = ad::reshape(Z, n * K, 1);
    f1 = ad::concat_cols(ad::mul(Pk, zf), Pk);                            // (nK) x f_mid
  }
  if (layer.opts.use_gcm) {
    const ad::Tensor Xk = ad::gather_rows(coords, nbrs.flat_ids);
    const ad::Tensor Xi = ad::gather_rows(coords, nbrs.query_ids);
    const ad::Tensor offsets = ad::sub(Xk, Xi);                           // (nK) x 3
    if (offsets_out) *offsets_out = offsets;
    const ad::Tensor corr = correlation_sums(layer.kernel, offsets);      // (nK) x 1
    f2 = ad::mul(ad::matmul(Pk, layer.w_ker), corr);                      // (nK) x f_mid
  }

  ad::Tensor fused;
  if (layer.opts.use_pfm && layer.opts.use_gcm)
    fused = ad::concat_cols(f1, f2);
  else
    fused = layer.opts.use_pfm ? f1 : f2;                                 // (nK) x f_int

  const ad::Tensor fh = ad::scatter_add_rows(fused, nbrs.query_ids, n);   // n x f_int
  ad::Tensor fb;
  if (layer.opts.use_ag) {
    // per-query weighted row sum == w2 . F^i
    std::vector<int> tile(static_cast<std::size_t>(n) * K);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < K; ++k) tile[static_cast<std::size_t>(i) * K + k] = k;
    const ad::Tensor w2col = ad::gather_rows(ad::transpose(layer.w2), tile);  // (nK) x 1
    const ad::Tensor logits = ad::scatter_add_rows(ad::mul(fused, w2col), nbrs.query_ids, n);
    const ad::Tensor fa = ad::softmax_rows(logits);                       // n x f_int
    fb = ad::add(fh, ad::mul(fa, fh));
  } else {
    fb = fh;
  }
  return ad::matmul(fb, layer.proj);                                      // n x f_out
}

}  // namespace fgnet

#endif  // FGNET_CONV_FG_CONV_HPP
