// Copyright (c) 2026 fgnet contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef FGNET_FILTER_OUTLIER_FILTER_HPP
#define FGNET_FILTER_OUTLIER_FILTER_HPP

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fgnet/core/grid_index.hpp"
#include "fgnet/core/parallel.hpp"
#include "fgnet/core/point_cloud.hpp"

namespace fgnet {

struct FilterParams {
  double radius = 0.1;          // ball query radius, meters
  int min_neighbors = 4;        // isolation threshold on the self-excluded count
  double sigma_multiplier = 2.0;

  void validate() const {
    if (!(radius > 0.0)) throw std::invalid_argument("filter: radius must be > 0");
    if (min_neighbors < 1) throw std::invalid_argument("filter: min_neighbors must be >= 1");
    if (!(sigma_multiplier > 0.0))
      throw std::invalid_argument("filter: sigma_multiplier must be > 0");
  }
};

struct FilterReport {
  std::vector<int> removed_isolated;
  std::vector<int> removed_statistical;
  double mu = 0.0;     // mean of surviving points' mean neighbor distance
  double sigma = 0.0;  // population standard deviation of the same
  double elapsed_seconds = 0.0;
};

/// Per-point neighborhood statistics against the full input cloud.
/// The query point is excluded from its own count and distance sum.
struct NeighborStats {
  std::vector<int> count;        // self-excluded neighbor count per point
  std::vector<double> mean_dist; // mean distance to those neighbors (0 if none)
};

inline NeighborStats neighborhood_stats(const PointCloud& cloud, const GridIndex& index,
                                        double radius) {
  const std::size_t n = cloud.size();
  NeighborStats st;
  st.count.assign(n, 0);
  st.mean_dist.assign(n, 0.0);
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const auto hits = index.radius_query(cloud, cloud.point(i), radius);
      int cnt = 0;
      double sum = 0.0;
      for (const Neighbor& nb : hits) {
        if (nb.id == static_cast<int>(i)) continue;
        ++cnt;
        sum += nb.distance;
      }
      st.count[i] = cnt;
      st.mean_dist[i] = cnt > 0 ? sum / cnt : 0.0;
    }
  });
  return st;
}

/// Two-pass outlier removal.
///
/// Pass 1 removes every point whose self-excluded neighbor count within
/// `radius` is <= min_neighbors. Pass 2 models the survivors' mean
/// neighbor distances as a Gaussian and removes the points falling
/// outside [mu - m*sigma, mu + m*sigma]. Both removal decisions are
/// committed in batch, so the result is independent of traversal order.
inline std::pair<PointCloud, FilterReport> filter(const PointCloud& cloud,
                                                  const FilterParams& params) {
  params.validate();
  const auto t0 = std::chrono::steady_clock::now();
  FilterReport report;
  if (cloud.size() == 0) {
    return {PointCloud{}, report};
  }

  const GridIndex index(cloud, params.radius);
  const NeighborStats st = neighborhood_stats(cloud, index, params.radius);
  const std::size_t n = cloud.size();

  std::vector<char> isolated(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (st.count[i] <= params.min_neighbors) {
      isolated[i] = 1;
      report.removed_isolated.push_back(static_cast<int>(i));
    }
  }

  // Gaussian fit over the survivors' mean neighbor distances.
  std::size_t survivors = 0;
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (!isolated[i]) {
      mean += st.mean_dist[i];
      ++survivors;
    }
  std::vector<int> keep;
  keep.reserve(survivors);
  if (survivors > 0) {
    mean /= static_cast<double>(survivors);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (!isolated[i]) {
        const double d = st.mean_dist[i] - mean;
        var += d * d;
      }
    var /= static_cast<double>(survivors);
    report.mu = mean;
    report.sigma = std::sqrt(var);
    const double lo = report.mu - params.sigma_multiplier * report.sigma;
    const double hi = report.mu + params.sigma_multiplier * report.sigma;
    for (std::size_t i = 0; i < n; ++i) {
      if (isolated[i]) continue;
      if (st.mean_dist[i] < lo || st.mean_dist[i] > hi)
        report.removed_statistical.push_back(static_cast<int>(i));
      else
        keep.push_back(static_cast<int>(i));
    }
  }

  PointCloud out = cloud.subset(keep);
  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(out), report};
}

}  // namespace fgnet

#endif  // FGNET_FILTER_OUTLIER_FILTER_HPP
