// Copyright (c) 2026 fgnet contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef FGNET_TRAIN_AUGMENT_HPP
#define FGNET_TRAIN_AUGMENT_HPP

#include <array>
#include <cmath>
#include <cstdint>

#include "fgnet/core/point_cloud.hpp"
#include "fgnet/core/rng.hpp"

namespace fgnet {

/// Draws for one augmentation: rotation angles about x, y, z and the
/// per-axis scale factors. Exposed so tests can inject identity draws.
struct AugmentDraw {
  std::array<double, 3> angles{0.0, 0.0, 0.0};
  std::array<double, 3> scales{1.0, 1.0, 1.0};

  static AugmentDraw sample(std::uint64_t seed) {
    Rng rng(seed);
    AugmentDraw d;
    for (auto& a : d.angles) a = rng.uniform(0.0, 6.283185307179586476925287);
    for (auto& s : d.scales) s = rng.uniform(0.85, 1.15);
    return d;
  }
};

/// Rotate about x, then y, then z, then scale each axis. Features and
/// labels pass through untouched.
inline PointCloud augment(const PointCloud& cloud, const AugmentDraw& draw) {
  PointCloud out = cloud;
  const double cx = std::cos(draw.angles[0]), sx = std::sin(draw.angles[0]);
  const double cy = std::cos(draw.angles[1]), sy = std::sin(draw.angles[1]);
  const double cz = std::cos(draw.angles[2]), sz = std::sin(draw.angles[2]);
  for (std::size_t i = 0; i < out.size(); ++i) {
    double x = out.coords[3 * i], y = out.coords[3 * i + 1], z = out.coords[3 * i + 2];
    // Rx
    {
      const double y2 = cx * y - sx * z;
      const double z2 = sx * y + cx * z;
      y = y2;
      z = z2;
    }
    // Ry
    {
      const double x2 = cy * x + sy * z;
      const double z2 = -sy * x + cy * z;
      x = x2;
      z = z2;
    }
    // Rz
    {
      const double x2 = cz * x - sz * y;
      const double y2 = sz * x + cz * y;
      x = x2;
      y = y2;
    }
    out.coords[3 * i] = draw.scales[0] * x;
    out.coords[3 * i + 1] = draw.scales[1] * y;
    out.coords[3 * i + 2] = draw.scales[2] * z;
  }
  return out;
}

inline PointCloud augment(const PointCloud& cloud, std::uint64_t seed) {
  return augment(cloud, AugmentDraw::sample(seed));
}

}  // namespace fgnet

#endif  // FGNET_TRAIN_AUGMENT_HPP
