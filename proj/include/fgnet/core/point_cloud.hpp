// Copyright (c) 2026 fgnet contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef FGNET_CORE_POINT_CLOUD_HPP
#define FGNET_CORE_POINT_CLOUD_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fgnet {

/// Dense point cloud: row-major coordinates, optional per-point features
/// and integer labels. The universal payload of the pipeline.
struct PointCloud {
  std::vector<double> coords;    // n x 3, row-major, meters
  std::vector<double> features;  // n x feature_width, row-major
  std::vector<int> labels;       // empty, or one class id per point
  int feature_width = 0;

  PointCloud() = default;

  std::size_t size() const { return coords.size() / 3; }
  bool has_labels() const { return !labels.empty(); }

  std::array<double, 3> point(std::size_t i) const {
    return {coords[3 * i], coords[3 * i + 1], coords[3 * i + 2]};
  }

  const double* point_ptr(std::size_t i) const { return coords.data() + 3 * i; }
  const double* feature_ptr(std::size_t i) const {
    return features.data() + static_cast<std::size_t>(feature_width) * i;
  }

  void push_point(double x, double y, double z) {
    coords.push_back(x);
    coords.push_back(y);
    coords.push_back(z);
  }

  /// Structural checks: finite coordinates, consistent feature/label sizes,
  /// labels within [0, class_count) when class_count >= 0.
  void validate(int class_count = -1) const {
    if (coords.size() % 3 != 0)
      throw std::invalid_argument("point cloud: coords size not a multiple of 3");
    const std::size_t n = size();
    for (std::size_t i = 0; i < coords.size(); ++i)
      if (!std::isfinite(coords[i]))
        throw std::invalid_argument("point cloud: non-finite coordinate at point " +
                                    std::to_string(i / 3));
    if (feature_width < 0)
      throw std::invalid_argument("point cloud: negative feature width");
    if (features.size() != n * static_cast<std::size_t>(feature_width))
      throw std::invalid_argument("point cloud: feature buffer size mismatch");
    if (!labels.empty()) {
      if (labels.size() != n)
        throw std::invalid_argument("point cloud: label count mismatch");
      if (class_count >= 0)
        for (std::size_t i = 0; i < n; ++i)
          if (labels[i] < 0 || labels[i] >= class_count)
            throw std::invalid_argument("point cloud: label out of range at point " +
                                        std::to_string(i));
    }
  }

  /// Keep exactly the points listed in `ids` (ascending), preserving order.
  PointCloud subset(const std::vector<int>& ids) const {
    PointCloud out;
    out.feature_width = feature_width;
    out.coords.reserve(ids.size() * 3);
    out.features.reserve(ids.size() * static_cast<std::size_t>(feature_width));
    if (has_labels()) out.labels.reserve(ids.size());
    for (int id : ids) {
      const auto p = point(static_cast<std::size_t>(id));
      out.push_point(p[0], p[1], p[2]);
      for (int c = 0; c < feature_width; ++c)
        out.features.push_back(features[static_cast<std::size_t>(feature_width) * id + c]);
      if (has_labels()) out.labels.push_back(labels[static_cast<std::size_t>(id)]);
    }
    return out;
  }
};

inline double squared_distance(const double* a, const double* b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace fgnet

#endif  // FGNET_CORE_POINT_CLOUD_HPP
