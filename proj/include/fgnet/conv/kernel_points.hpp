// Copyright (c) 2026 fgnet contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef FGNET_CONV_KERNEL_POINTS_HPP
#define FGNET_CONV_KERNEL_POINTS_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fgnet/ad/tensor.hpp"
#include "fgnet/core/rng.hpp"

namespace fgnet {

/// Pseudo kernel points inside the query ball: fixed base dispositions plus
/// a learnable deformation, with a Gaussian influence profile.
struct KernelSet {
  ad::Tensor base;    // count x 3, fixed for the layer lifetime
  ad::Tensor deform;  // count x 3, learnable offsets
  double sigma = 1.0; // influence distance, meters
  double m = 1.0;     // constant in the Gaussian denominator
  double radius = 1.0;

  int count() const { return base.rows(); }

  /// Deformed positions as plain values (base + deform).
  std::vector<double> deformed() const {
    std::vector<double> out(base.count());
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = base.values()[i] + deform.values()[i];
    return out;
  }
};

namespace detail {

/// Spread `count-1` points through the unit ball around a fixed center
/// point by repulsive energy descent. Deterministic: seeded start, fixed
/// iteration count, serial updates.
inline std::vector<double> kernel_dispositions(int count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("kernel set: need at least one point");
  std::vector<std::array<double, 3>> pts(count, {0.0, 0.0, 0.0});
  Rng rng(seed);
  for (int i = 1; i < count; ++i) {
    // rejection-sample the unit ball
    for (;;) {
      const double x = rng.uniform(-1, 1), y = rng.uniform(-1, 1), z = rng.uniform(-1, 1);
      if (x * x + y * y + z * z <= 1.0) {
        pts[i] = {x, y, z};
        break;
      }
    }
  }
  const double step = 0.02;
  for (int iter = 0; iter < 300; ++iter) {
    for (int i = 1; i < count; ++i) {
      std::array<double, 3> force{0, 0, 0};
      for (int j = 0; j < count; ++j) {
        if (i == j) continue;
        const double dx = pts[i][0] - pts[j][0];
        const double dy = pts[i][1] - pts[j][1];
        const double dz = pts[i][2] - pts[j][2];
        const double d2 = dx * dx + dy * dy + dz * dz + 1e-9;
        const double inv = 1.0 / (d2 * std::sqrt(d2));
        force[0] += dx * inv;
        force[1] += dy * inv;
        force[2] += dz * inv;
      }
      // weak pull toward the center keeps the set from collapsing on the shell
      for (int a = 0; a < 3; ++a) force[a] -= 1.5 * pts[i][a];
      for (int a = 0; a < 3; ++a) pts[i][a] += step * force[a];
      const double n2 = pts[i][0] * pts[i][0] + pts[i][1] * pts[i][1] + pts[i][2] * pts[i][2];
      if (n2 > 1.0) {
        const double inv = 1.0 / std::sqrt(n2);
        for (int a = 0; a < 3; ++a) pts[i][a] *= inv;
      }
    }
  }
  std::vector<double> flat(static_cast<std::size_t>(count) * 3);
  for (int i = 0; i < count; ++i)
    for (int a = 0; a < 3; ++a) flat[static_cast<std::size_t>(i) * 3 + a] = pts[i][a];
  return flat;
}

}  // namespace detail

/// Build a kernel set for a layer with query radius `radius`. One point sits
/// at the origin; the rest fill the ball at 0.75 * radius. sigma defaults to
/// radius / 2.5 and m to 1.
inline KernelSet make_kernel_set(int count, double radius, std::uint64_t seed,
                                 const std::string& name_prefix = "kernel",
                                 bool learnable = true) {
  if (!(radius > 0.0)) throw std::invalid_argument("kernel set: radius must be > 0");
  std::vector<double> base = detail::kernel_dispositions(count, seed);
  for (auto& v : base) v *= 0.75 * radius;
  KernelSet k;
  k.base = ad::Tensor::from_values(count, 3, std::move(base));
  k.deform = learnable
                 ? ad::Tensor::param(count, 3, std::vector<double>(count * 3, 0.0),
                                     name_prefix + ".deform")
                 : ad::Tensor::from_values(count, 3, std::vector<double>(count * 3, 0.0));
  k.sigma = radius / 2.5;
  k.m = 1.0;
  k.radius = radius;
  return k;
}

/// Correlation of every kernel point against one neighbor offset, computed
/// scalar-style: C_i = exp(-|(s_i + ds_i) - dx|^2 / (m sigma^2)) / count.
inline std::vector<double> kernel_correlation(const KernelSet& kernel,
                                              const std::array<double, 3>& dx) {
  const int n = kernel.count();
  const double denom = kernel.m * kernel.sigma * kernel.sigma;
  std::vector<double> out(n);
  const auto pos = kernel.deformed();
  for (int i = 0; i < n; ++i) {
    const double ex = pos[3 * i] - dx[0];
    const double ey = pos[3 * i + 1] - dx[1];
    const double ez = pos[3 * i + 2] - dx[2];
    out[i] = std::exp(-(ex * ex + ey * ey + ez * ez) / denom) / n;
  }
  return out;
}

}  // namespace fgnet

#endif  // FGNET_CONV_KERNEL_POINTS_HPP
