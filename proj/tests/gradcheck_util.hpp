// Copyright (c) 2026 fgnet contributors
// SPDX-License-Identifier: Apache-2.0
//
// Shared finite-difference checking utilities for the test suites.

#ifndef FGNET_TESTS_GRADCHECK_UTIL_HPP
#define FGNET_TESTS_GRADCHECK_UTIL_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "fgnet/ad/tensor.hpp"
#include "fgnet/core/rng.hpp"

namespace gradcheck {

inline double rel_err(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-6, std::abs(analytic) + std::abs(numeric));
}

/// Max relative error between analytic gradients and central finite
/// differences over every entry of every leaf. `build` must construct the
/// scalar loss graph from the current leaf values on each call.
inline double max_rel_err(const std::function<fgnet::ad::Tensor()>& build,
                          std::vector<fgnet::ad::Tensor> leaves, double step = 1e-5) {
  for (auto& leaf : leaves) leaf.zero_grad();
  const fgnet::ad::Tensor loss = build();
  loss.backward();

  double worst = 0.0;
  for (auto& leaf : leaves) {
    for (std::size_t i = 0; i < leaf.count(); ++i) {
      const double saved = leaf.mutable_values()[i];
      leaf.mutable_values()[i] = saved + step;
      const double up = build().item();
      leaf.mutable_values()[i] = saved - step;
      const double dn = build().item();
      leaf.mutable_values()[i] = saved;
      const double numeric = (up - dn) / (2.0 * step);
      worst = std::max(worst, rel_err(leaf.grad()[i], numeric));
    }
  }
  return worst;
}

inline std::vector<double> random_values(std::size_t n, fgnet::Rng& rng, double lo = -1.0,
                                         double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace gradcheck

#endif  // FGNET_TESTS_GRADCHECK_UTIL_HPP
