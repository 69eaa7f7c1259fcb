// Copyright (c) 2026 fgnet contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef FGNET_CORE_GRID_INDEX_HPP
#define FGNET_CORE_GRID_INDEX_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fgnet/core/parallel.hpp"
#include "fgnet/core/point_cloud.hpp"

namespace fgnet {

/// One (distance, id) hit. Ordering is the canonical total order used
/// everywhere downstream: distance first, then ascending point id.
struct Neighbor {
  double distance;
  int id;
  friend bool operator<(const Neighbor& a, const Neighbor& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.id < b.id;
  }
  friend bool operator==(const Neighbor& a, const Neighbor& b) {
    return a.distance == b.distance && a.id == b.id;
  }
};

/// Flat per-query neighborhoods: query q owns [offsets[q], offsets[q+1]).
struct NeighborList {
  std::size_t query_count = 0;
  std::vector<std::size_t> offsets;  // query_count + 1 entries
  std::vector<int> indices;
  std::vector<double> distances;

  std::size_t count(std::size_t q) const { return offsets[q + 1] - offsets[q]; }
  const int* ids(std::size_t q) const { return indices.data() + offsets[q]; }
  const double* dists(std::size_t q) const { return distances.data() + offsets[q]; }
};

/// Uniform hash-grid over a point cloud. Cell of a point is
/// floor(coord / cell_size) per axis. Immutable once built; concurrent
/// read-only queries are safe.
class GridIndex {
 public:
  GridIndex(const PointCloud& cloud, double cell_size) : cell_size_(cell_size) {
    if (!(cell_size > 0.0)) throw std::invalid_argument("grid index: cell_size must be > 0");
    const std::size_t n = cloud.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double* p = cloud.point_ptr(i);
      if (!std::isfinite(p[0]) || !std::isfinite(p[1]) || !std::isfinite(p[2]))
        throw std::invalid_argument("grid index: non-finite coordinate at point " +
                                    std::to_string(i));
      cells_[key_of(p)].push_back(static_cast<int>(i));
      for (int a = 0; a < 3; ++a) {
        bbox_min_[a] = std::min(bbox_min_[a], p[a]);
        bbox_max_[a] = std::max(bbox_max_[a], p[a]);
      }
    }
  }

  double cell_size() const { return cell_size_; }
  std::size_t cell_count() const { return cells_.size(); }

  double bbox_diagonal() const {
    if (cells_.empty()) return 0.0;
    double s = 0.0;
    for (int a = 0; a < 3; ++a) {
      const double d = bbox_max_[a] - bbox_min_[a];
      s += d * d;
    }
    return std::sqrt(s);
  }

  /// Points of `cloud` with distance <= r from `query`, sorted by
  /// (distance, id). The ball is boundary inclusive.
  std::vector<Neighbor> radius_query(const PointCloud& cloud, const std::array<double, 3>& query,
                                     double r) const {
    if (!(r > 0.0)) throw std::invalid_argument("radius query: r must be > 0");
    std::vector<Neighbor> hits;
    const double r2 = r * r;
    const std::int64_t lox = cell_floor(query[0] - r), hix = cell_floor(query[0] + r);
    const std::int64_t loy = cell_floor(query[1] - r), hiy = cell_floor(query[1] + r);
    const std::int64_t loz = cell_floor(query[2] - r), hiz = cell_floor(query[2] + r);
    for (std::int64_t cx = lox; cx <= hix; ++cx)
      for (std::int64_t cy = loy; cy <= hiy; ++cy)
        for (std::int64_t cz = loz; cz <= hiz; ++cz) {
          const auto it = cells_.find(pack(cx, cy, cz));
          if (it == cells_.end()) continue;
          for (int id : it->second) {
            const double d2 = squared_distance(cloud.point_ptr(id), query.data());
            if (d2 <= r2) hits.push_back({std::sqrt(d2), id});
          }
        }
    std::sort(hits.begin(), hits.end());
    return hits;
  }

  /// The k nearest points (all points when the cloud has fewer than k),
  /// sorted by (distance, id).
  std::vector<Neighbor> knn_query(const PointCloud& cloud, const std::array<double, 3>& query,
                                  std::size_t k) const {
    if (k < 1) throw std::invalid_argument("knn query: k must be >= 1");
    if (cloud.size() == 0) throw std::invalid_argument("knn query: empty cloud");
    if (cloud.size() <= k) {
      std::vector<Neighbor> all;
      all.reserve(cloud.size());
      for (std::size_t i = 0; i < cloud.size(); ++i)
        all.push_back({std::sqrt(squared_distance(cloud.point_ptr(i), query.data())),
                       static_cast<int>(i)});
      std::sort(all.begin(), all.end());
      return all;
    }
    // Grow the search radius until the ball holds k points; the k nearest
    // are then guaranteed to be inside it. Terminates because the ball
    // eventually covers the whole bounding box and N > k here.
    double r = cell_size_;
    for (;;) {
      auto hits = radius_query(cloud, query, r);
      if (hits.size() >= k) {
        hits.resize(k);
        return hits;
      }
      r *= 2.0;
    }
  }

  /// Batched radius search for every point of `queries` against `cloud`.
  /// Data-parallel; output identical regardless of worker count.
  NeighborList radius_search_all(const PointCloud& cloud, const PointCloud& queries,
                                 double r) const {
    const std::size_t q = queries.size();
    std::vector<std::vector<Neighbor>> per_query(q);
    parallel_for(q, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i)
        per_query[i] = radius_query(cloud, queries.point(i), r);
    });
    NeighborList out;
    out.query_count = q;
    out.offsets.resize(q + 1, 0);
    for (std::size_t i = 0; i < q; ++i) out.offsets[i + 1] = out.offsets[i] + per_query[i].size();
    out.indices.resize(out.offsets[q]);
    out.distances.resize(out.offsets[q]);
    parallel_for(q, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        std::size_t at = out.offsets[i];
        for (const Neighbor& nb : per_query[i]) {
          out.indices[at] = nb.id;
          out.distances[at] = nb.distance;
          ++at;
        }
      }
    });
    return out;
  }

  /// Every point id stored in the cell that contains `p` (empty if none).
  std::vector<int> cell_members(const std::array<double, 3>& p) const {
    const auto it = cells_.find(key_of(p.data()));
    if (it == cells_.end()) return {};
    return it->second;
  }

 private:
  std::int64_t cell_floor(double v) const {
    return static_cast<std::int64_t>(std::floor(v / cell_size_));
  }

  // 21 bits per axis, offset binary; ample for desk-scale extents.
  static std::uint64_t pack(std::int64_t x, std::int64_t y, std::int64_t z) {
    const std::uint64_t bias = 1ull << 20;
    return ((static_cast<std::uint64_t>(x) + bias) & 0x1FFFFF) |
           (((static_cast<std::uint64_t>(y) + bias) & 0x1FFFFF) << 21) |
           (((static_cast<std::uint64_t>(z) + bias) & 0x1FFFFF) << 42);
  }

  std::uint64_t key_of(const double* p) const {
    return pack(cell_floor(p[0]), cell_floor(p[1]), cell_floor(p[2]));
  }

  struct IdentityHash {
    std::size_t operator()(std::uint64_t k) const {
      k ^= k >> 33;
      k *= 0xFF51AFD7ED558CCDull;
      k ^= k >> 33;
      return static_cast<std::size_t>(k);
    }
  };

  double cell_size_;
  std::unordered_map<std::uint64_t, std::vector<int>, IdentityHash> cells_;
  std::array<double, 3> bbox_min_{std::numeric_limits<double>::infinity(),
                                  std::numeric_limits<double>::infinity(),
                                  std::numeric_limits<double>::infinity()};
  std::array<double, 3> bbox_max_{-std::numeric_limits<double>::infinity(),
                                  -std::numeric_limits<double>::infinity(),
                                  -std::numeric_limits<double>::infinity()};
};

}  // namespace fgnet

#endif  // FGNET_CORE_GRID_INDEX_HPP
