// Copyright (c) 2026 fgnet contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef FGNET_TRAIN_ADAM_HPP
#define FGNET_TRAIN_ADAM_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "fgnet/ad/tensor.hpp"

namespace fgnet {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("adam: learning rate must be > 0");
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
      throw std::invalid_argument("adam: betas must lie in (0, 1)");
  }
};

/// First/second moment state, one slot per parameter tensor.
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  long step = 0;

  static AdamState make(const std::vector<ad::Tensor>& params) {
    AdamState s;
    for (const auto& p : params) {
      s.m.emplace_back(p.count(), 0.0);
      s.v.emplace_back(p.count(), 0.0);
    }
    return s;
  }
};

/// One bias-corrected Adam update over every parameter, reading the grads
/// accumulated by the last backward pass. Throws on a non-finite gradient,
/// naming the parameter.
inline void adam_step(std::vector<ad::Tensor>& params, AdamState& state,
                      const AdamConfig& config) {
  config.validate();
  if (params.size() != state.m.size())
    throw std::invalid_argument("adam: state does not match parameter list");
  ++state.step;
  const double bc1 = 1.0 - std::pow(config.beta1, state.step);
  const double bc2 = 1.0 - std::pow(config.beta2, state.step);
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto& values = params[t].mutable_values();
    const auto& grad = params[t].grad();
    auto& m = state.m[t];
    auto& v = state.v[t];
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grad[i];
      if (!std::isfinite(g))
        throw std::runtime_error("adam: non-finite gradient in " +
                                 (params[t].name().empty() ? "parameter " + std::to_string(t)
                                                           : params[t].name()));
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      values[i] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.epsilon);
    }
  }
}

}  // namespace fgnet

#endif  // FGNET_TRAIN_ADAM_HPP
