// Copyright (c) 2026 fgnet contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef FGNET_DATA_SCENE_HPP
#define FGNET_DATA_SCENE_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fgnet/core/point_cloud.hpp"
#include "fgnet/core/rng.hpp"

namespace fgnet {

/// Surface primitive of a synthetic labeled scene.
struct Primitive {
  enum class Kind { plane, box, sphere, cylinder };
  Kind kind = Kind::plane;
  std::array<double, 3> center{0, 0, 0};
  // plane: extent[0] x extent[1] rectangle in the xy plane;
  // box: full edge lengths; sphere: extent[0] = radius;
  // cylinder: extent[0] = radius, extent[1] = height (lateral surface).
  std::array<double, 3> extent{1, 1, 1};
  int class_id = 0;
  double density = 100.0;  // points per square meter

  double area() const {
    switch (kind) {
      case Kind::plane: return extent[0] * extent[1];
      case Kind::box:
        return 2.0 * (extent[0] * extent[1] + extent[1] * extent[2] + extent[0] * extent[2]);
      case Kind::sphere: return 4.0 * 3.14159265358979323846 * extent[0] * extent[0];
      case Kind::cylinder: return 2.0 * 3.14159265358979323846 * extent[0] * extent[1];
    }
    return 0.0;
  }

  /// Signed-ish distance to the surface; 0 means on it.
  double surface_error(const std::array<double, 3>& p) const {
    const double x = p[0] - center[0], y = p[1] - center[1], z = p[2] - center[2];
    switch (kind) {
      case Kind::plane: {
        if (std::abs(x) > extent[0] / 2 || std::abs(y) > extent[1] / 2) return 1e300;
        return std::abs(z);
      }
      case Kind::box: {
        const double dx = std::abs(x) - extent[0] / 2;
        const double dy = std::abs(y) - extent[1] / 2;
        const double dz = std::abs(z) - extent[2] / 2;
        if (dx > 0 || dy > 0 || dz > 0) return 1e300;
        return std::min({-dx, -dy, -dz});  // distance to the nearest face from inside
      }
      case Kind::sphere:
        return std::abs(std::sqrt(x * x + y * y + z * z) - extent[0]);
      case Kind::cylinder: {
        if (std::abs(z) > extent[1] / 2) return 1e300;
        return std::abs(std::sqrt(x * x + y * y) - extent[0]);
      }
    }
    return 1e300;
  }
};

struct SceneSpec {
  std::vector<Primitive> primitives;
  int outlier_count = 0;
  double outlier_spread = 1.5;  // bbox expansion factor for injected outliers
  double noise_sigma = 0.0;     // Gaussian positional jitter, meters
  int noise_class = -1;         // label of injected outliers; -1 = max class id + 1
  std::uint64_t seed = 0;

  void validate() const {
    for (const auto& p : primitives) {
      if (!(p.density > 0.0)) throw std::invalid_argument("scene: density must be > 0");
      if (p.class_id < 0) throw std::invalid_argument("scene: negative class id");
    }
    if (outlier_count < 0) throw std::invalid_argument("scene: negative outlier count");
  }
};

namespace detail {

inline std::array<double, 3> sample_on_primitive(const Primitive& p, Rng& rng) {
  switch (p.kind) {
    case Primitive::Kind::plane:
      return {p.center[0] + rng.uniform(-p.extent[0] / 2, p.extent[0] / 2),
              p.center[1] + rng.uniform(-p.extent[1] / 2, p.extent[1] / 2), p.center[2]};
    case Primitive::Kind::box: {
      // pick a face weighted by its area, then a point on it
      const double ax = p.extent[1] * p.extent[2];
      const double ay = p.extent[0] * p.extent[2];
      const double az = p.extent[0] * p.extent[1];
      const double total = 2 * (ax + ay + az);
      double pick = rng.uniform(0.0, total);
      const double sign = pick < ax + ay + az ? -1.0 : 1.0;
      if (pick >= ax + ay + az) pick -= ax + ay + az;
      double u = rng.uniform(-0.5, 0.5), v = rng.uniform(-0.5, 0.5);
      if (pick < ax)
        return {p.center[0] + sign * p.extent[0] / 2, p.center[1] + u * p.extent[1],
                p.center[2] + v * p.extent[2]};
      if (pick < ax + ay)
        return {p.center[0] + u * p.extent[0], p.center[1] + sign * p.extent[1] / 2,
                p.center[2] + v * p.extent[2]};
      return {p.center[0] + u * p.extent[0], p.center[1] + v * p.extent[1],
              p.center[2] + sign * p.extent[2] / 2};
    }
    case Primitive::Kind::sphere: {
      // uniform direction via normal draws
      double x, y, z, n2;
      do {
        x = rng.normal();
        y = rng.normal();
        z = rng.normal();
        n2 = x * x + y * y + z * z;
      } while (n2 < 1e-12);
      const double inv = p.extent[0] / std::sqrt(n2);
      return {p.center[0] + x * inv, p.center[1] + y * inv, p.center[2] + z * inv};
    }
    case Primitive::Kind::cylinder: {
      const double phi = rng.uniform(0.0, 6.283185307179586476925287);
      return {p.center[0] + p.extent[0] * std::cos(phi),
              p.center[1] + p.extent[0] * std::sin(phi),
              p.center[2] + rng.uniform(-p.extent[1] / 2, p.extent[1] / 2)};
    }
  }
  return {0, 0, 0};
}

}  // namespace detail

/// Deterministic synthetic scene: each primitive contributes exactly
/// round(area * density) surface points with Gaussian jitter, then the
/// requested number of uniform outliers. When primitives overlap, a point
/// lying on a later primitive's surface takes that primitive's label.
/// Every point carries one constant feature (1.0).
inline PointCloud generate_scene(const SceneSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  PointCloud cloud;
  cloud.feature_width = 1;

  int max_class = -1;
  for (const auto& p : spec.primitives) max_class = std::max(max_class, p.class_id);
  const int noise_label = spec.noise_class >= 0 ? spec.noise_class : max_class + 1;

  for (std::size_t pi = 0; pi < spec.primitives.size(); ++pi) {
    const Primitive& prim = spec.primitives[pi];
    const long count = std::lround(prim.area() * prim.density);
    for (long i = 0; i < count; ++i) {
      std::array<double, 3> p = detail::sample_on_primitive(prim, rng);
      int label = prim.class_id;
      for (std::size_t pj = pi + 1; pj < spec.primitives.size(); ++pj)
        if (spec.primitives[pj].surface_error(p) <= 1e-9) label = spec.primitives[pj].class_id;
      if (spec.noise_sigma > 0.0)
        for (int a = 0; a < 3; ++a) p[a] += rng.normal(0.0, spec.noise_sigma);
      cloud.push_point(p[0], p[1], p[2]);
      cloud.features.push_back(1.0);
      cloud.labels.push_back(label);
    }
  }

  if (spec.outlier_count > 0) {
    double lo[3] = {-1, -1, -1}, hi[3] = {1, 1, 1};
    if (cloud.size() > 0) {
      for (int a = 0; a < 3; ++a) {
        lo[a] = 1e300;
        hi[a] = -1e300;
      }
      for (std::size_t i = 0; i < cloud.size(); ++i)
        for (int a = 0; a < 3; ++a) {
          lo[a] = std::min(lo[a], cloud.coords[3 * i + a]);
          hi[a] = std::max(hi[a], cloud.coords[3 * i + a]);
        }
    }
    for (int a = 0; a < 3; ++a) {
      const double mid = (lo[a] + hi[a]) / 2, half = (hi[a] - lo[a]) / 2;
      lo[a] = mid - half * spec.outlier_spread - 1e-3;
      hi[a] = mid + half * spec.outlier_spread + 1e-3;
    }
    for (int i = 0; i < spec.outlier_count; ++i) {
      cloud.push_point(rng.uniform(lo[0], hi[0]), rng.uniform(lo[1], hi[1]),
                       rng.uniform(lo[2], hi[2]));
      cloud.features.push_back(1.0);
      cloud.labels.push_back(noise_label);
    }
  }
  return cloud;
}

}  // namespace fgnet

#endif  // FGNET_DATA_SCENE_HPP
