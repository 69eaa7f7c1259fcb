// Copyright (c) 2026 fgnet contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef FGNET_NET_GLOBAL_ATTENTION_HPP
#define FGNET_NET_GLOBAL_ATTENTION_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fgnet/ad/tensor.hpp"
#include "fgnet/core/rng.hpp"

namespace fgnet {

/// Non-local self-attention over the coarsest-stage features. Two
/// independent 1x1 projections produce the latent maps whose outer product
/// is the relevance score matrix; the softmax normalizes over the whole
/// matrix by default (a row-wise variant is available for ablation).
struct GlobalAttention {
  ad::Tensor w_g1;  // L x c_mid
  ad::Tensor w_g2;  // L x c_mid
  bool rowwise_softmax = false;

  static GlobalAttention make(int width, int c_mid, std::uint64_t seed,
                              const std::string& name = "global") {
    Rng rng(seed);
    auto init = [&rng](int r, int c, double scale) {
      std::vector<double> v(static_cast<std::size_t>(r) * c);
      for (auto& x : v) x = rng.uniform(-scale, scale);
      return v;
    };
    GlobalAttention g;
    const double scale = 1.0 / std::sqrt(width);
    g.w_g1 = ad::Tensor::param(width, c_mid, init(width, c_mid, scale), name + ".w_g1");
    g.w_g2 = ad::Tensor::param(width, c_mid, init(width, c_mid, scale), name + ".w_g2");
    return g;
  }

  std::vector<ad::Tensor> parameters() const { return {w_g1, w_g2}; }
};

/// Score matrix S for diagnostics and the attended output.
struct GlobalAttendResult {
  ad::Tensor scores;  // N x N, entries sum to 1 (full-matrix softmax)
  ad::Tensor output;  // N x L, residual added
};

inline GlobalAttendResult global_attend_full(const GlobalAttention& module,
                                             const ad::Tensor& features) {
  const ad::Tensor m1 = ad::matmul(features, module.w_g1);
  const ad::Tensor m2 = ad::matmul(features, module.w_g2);
  const ad::Tensor relevance = ad::matmul(m1, ad::transpose(m2));
  const ad::Tensor scores = module.rowwise_softmax ? ad::softmax_rows(relevance)
                                                   : ad::softmax_full(relevance);
  const ad::Tensor attended = ad::matmul(scores, features);
  return {scores, ad::add(attended, features)};
}

inline ad::Tensor global_attend(const GlobalAttention& module, const ad::Tensor& features) {
  return global_attend_full(module, features).output;
}

}  // namespace fgnet

#endif  // FGNET_NET_GLOBAL_ATTENTION_HPP
