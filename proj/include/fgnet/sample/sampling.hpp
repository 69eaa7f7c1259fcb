// Copyright (c) 2026 fgnet contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef FGNET_SAMPLE_SAMPLING_HPP
#define FGNET_SAMPLE_SAMPLING_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "fgnet/core/point_cloud.hpp"
#include "fgnet/core/rng.hpp"

namespace fgnet {

/// Uniform sampling without replacement: `count` unique ids, deterministic
/// given the seed. Partial Fisher-Yates over the id array.
inline std::vector<int> random_sample(const PointCloud& cloud, std::size_t count,
                                      std::uint64_t seed) {
  const std::size_t n = cloud.size();
  if (count > n) throw std::invalid_argument("random_sample: count exceeds point count");
  std::vector<int> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.uniform_index(n - i);
    std::swap(ids[i], ids[j]);
  }
  ids.resize(count);
  return ids;
}

/// Greedy farthest-point sampling: repeatedly pick the point with the
/// largest distance to the selected set, ties broken by lowest id.
inline std::vector<int> farthest_point_sample(const PointCloud& cloud, std::size_t count,
                                              std::size_t start_index = 0) {
  const std::size_t n = cloud.size();
  if (count < 1) throw std::invalid_argument("farthest_point_sample: count must be >= 1");
  if (count > n) throw std::invalid_argument("farthest_point_sample: count exceeds point count");
  if (start_index >= n) throw std::invalid_argument("farthest_point_sample: bad start index");

  std::vector<int> picked;
  picked.reserve(count);
  picked.push_back(static_cast<int>(start_index));

  std::vector<double> best_d2(n, std::numeric_limits<double>::infinity());
  std::size_t last = start_index;
  while (picked.size() < count) {
    const double* lp = cloud.point_ptr(last);
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d2 = squared_distance(cloud.point_ptr(i), lp);
      if (d2 < best_d2[i]) best_d2[i] = d2;
      if (best_d2[i] > best) {  // strict beats keep the lowest id on ties
        best = best_d2[i];
        arg = i;
      }
    }
    picked.push_back(static_cast<int>(arg));
    best_d2[arg] = 0.0;
    last = arg;
  }
  return picked;
}

/// Inverse-density sampling: weighted draw without replacement with
/// weight 1 / (neighbor_count + 1). Implemented as the exponential-keys
/// scheme (draw u, score u^(1/w), keep the top `count`), which is the
/// standard sequential weighted reservoir draw.
inline std::vector<int> inverse_density_sample(const PointCloud& cloud,
                                               const std::vector<int>& neighbor_counts,
                                               std::size_t count, std::uint64_t seed) {
  const std::size_t n = cloud.size();
  if (count > n) throw std::invalid_argument("inverse_density_sample: count exceeds point count");
  if (neighbor_counts.size() != n)
    throw std::invalid_argument("inverse_density_sample: neighbor count size mismatch");
  if (count == 0) return {};

  Rng rng(seed);
  // key = log(u)/w; the `count` largest keys win
  std::vector<std::pair<double, int>> keyed(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 1.0 / (static_cast<double>(neighbor_counts[i]) + 1.0);
    double u = rng.uniform();
    while (u <= 0.0) u = rng.uniform();
    keyed[i] = {std::log(u) / w, static_cast<int>(i)};
  }
  std::partial_sort(keyed.begin(), keyed.begin() + count, keyed.end(),
                    [](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return a.second < b.second;
                    });
  std::vector<int> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = keyed[i].second;
  return out;
}

}  // namespace fgnet

#endif  // FGNET_SAMPLE_SAMPLING_HPP
