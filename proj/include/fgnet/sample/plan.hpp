// Copyright (c) 2026 fgnet contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef FGNET_SAMPLE_PLAN_HPP
#define FGNET_SAMPLE_PLAN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fgnet/core/grid_index.hpp"
#include "fgnet/core/point_cloud.hpp"
#include "fgnet/sample/gumbel_sampler.hpp"
#include "fgnet/sample/sampling.hpp"

namespace fgnet {

enum class SampleMode { rs, fps, ids, gss, igsam };

inline SampleMode sample_mode_from_string(const std::string& s) {
  if (s == "rs") return SampleMode::rs;
  if (s == "fps") return SampleMode::fps;
  if (s == "ids") return SampleMode::ids;
  if (s == "gss") return SampleMode::gss;
  if (s == "igsam") return SampleMode::igsam;
  throw std::invalid_argument("unknown sampling mode: " + s);
}

/// Fine-to-coarse index maps for the pyramid. Stage s selects
/// `indices[s]` out of the stage-s cloud (stage 0 = input cloud) and
/// `upsample[s]` maps every stage-s point to its nearest selected point.
struct SamplingPlan {
  std::vector<std::vector<int>> indices;   // one entry per stage
  std::vector<std::vector<int>> upsample;  // same length; ids into the coarser stage

  std::size_t stages() const { return indices.size(); }
};

/// Default stage schedule: repeated reduction by `ratio` (ceil), h entries.
inline std::vector<std::size_t> default_schedule(std::size_t n, int stages, int ratio = 5) {
  std::vector<std::size_t> counts;
  std::size_t cur = n;
  for (int s = 0; s < stages; ++s) {
    cur = (cur + ratio - 1) / ratio;
    if (cur < 1) cur = 1;
    counts.push_back(cur);
  }
  return counts;
}

namespace detail {

inline double idx_cell_hint(const PointCloud& cloud) {
  // bbox-derived hint so the spacing probe has a reasonable grid
  double lo[3] = {1e300, 1e300, 1e300};
  double hi[3] = {-1e300, -1e300, -1e300};
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double* p = cloud.point_ptr(i);
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  double d2 = 0.0;
  for (int a = 0; a < 3; ++a) d2 += (hi[a] - lo[a]) * (hi[a] - lo[a]);
  const double diag = std::sqrt(d2);
  const double cells = std::cbrt(static_cast<double>(std::max<std::size_t>(cloud.size(), 1)));
  return diag > 0.0 ? diag / std::max(1.0, cells) : 1.0;
}

/// Median nearest-neighbor spacing over a deterministic subset; the stage
/// radius default is a small multiple of this.
inline double estimate_spacing(const PointCloud& cloud) {
  const std::size_t n = cloud.size();
  if (n < 2) return 1.0;
  const std::size_t probes = std::min<std::size_t>(n, 256);
  GridIndex idx(cloud, std::max(1e-9, idx_cell_hint(cloud)));
  std::vector<double> nn;
  nn.reserve(probes);
  const std::size_t stride = std::max<std::size_t>(1, n / probes);
  for (std::size_t i = 0; i < n && nn.size() < probes; i += stride) {
    const auto hits = idx.knn_query(cloud, cloud.point(i), 2);
    if (hits.size() >= 2) nn.push_back(hits[1].distance);
  }
  if (nn.empty()) return 1.0;
  std::sort(nn.begin(), nn.end());
  const double med = nn[nn.size() / 2];
  return med > 0.0 ? med : 1.0;
}

}  // namespace detail

struct PlanParams {
  std::vector<std::size_t> schedule;  // per-stage target counts
  SampleMode mode = SampleMode::igsam;
  std::uint64_t seed = 0;
  double ids_radius = 0.0;            // 0 = auto (2.5 x estimated spacing, doubled per stage)
  const GumbelSampler* sampler = nullptr;  // optional trained sampler for the GSS stage
};

/// Build the fine-to-coarse sampling plan. IGSAM uses inverse-density
/// stages with a Gumbel stage at the coarsest level. Upsample maps use the
/// nearest selected point (k = 1).
inline SamplingPlan build_plan(const PointCloud& cloud, const PlanParams& params) {
  const auto& schedule = params.schedule;
  if (schedule.empty()) throw std::invalid_argument("build_plan: empty schedule");
  std::size_t prev = cloud.size();
  for (std::size_t s = 0; s < schedule.size(); ++s) {
    if (schedule[s] > prev)
      throw std::invalid_argument("build_plan: stage " + std::to_string(s) + " count " +
                                  std::to_string(schedule[s]) + " does not decrease from " +
                                  std::to_string(prev));
    prev = schedule[s];
  }

  SamplingPlan plan;
  PointCloud stage = cloud;
  double radius = params.ids_radius > 0.0 ? params.ids_radius
                                          : 2.5 * detail::estimate_spacing(cloud);
  for (std::size_t s = 0; s < schedule.size(); ++s) {
    const std::size_t count = schedule[s];
    const bool last = s + 1 == schedule.size();
    std::vector<int> picked;

    SampleMode stage_mode = params.mode;
    if (params.mode == SampleMode::igsam) stage_mode = last ? SampleMode::gss : SampleMode::ids;

    switch (stage_mode) {
      case SampleMode::rs:
        picked = random_sample(stage, count, params.seed + s);
        break;
      case SampleMode::fps:
        picked = farthest_point_sample(stage, count, 0);
        break;
      case SampleMode::ids: {
        GridIndex idx(stage, radius);
        const NeighborList lists = idx.radius_search_all(stage, stage, radius);
        std::vector<int> counts(stage.size());
        for (std::size_t i = 0; i < stage.size(); ++i)
          counts[i] = static_cast<int>(lists.count(i)) - 1;  // exclude self
        picked = inverse_density_sample(stage, counts, count, params.seed + s);
        break;
      }
      case SampleMode::gss: {
        if (params.sampler) {
          if (params.sampler->select_count() != static_cast<int>(count) ||
              params.sampler->weights.cols() != 3 + stage.feature_width)
            throw std::invalid_argument("build_plan: provided Gumbel sampler shape mismatch");
          picked = gumbel_hard_select(*params.sampler, stage);
        } else {
          const GumbelSampler s2 = GumbelSampler::make(static_cast<int>(count),
                                                       stage.feature_width, params.seed + s);
          picked = gumbel_hard_select(s2, stage);
        }
        break;
      }
      case SampleMode::igsam:
        break;  // resolved above
    }

    std::sort(picked.begin(), picked.end());
    plan.indices.push_back(picked);

    // nearest-coarse correspondence for later interpolation
    PointCloud coarse = stage.subset(picked);
    std::vector<int> up(stage.size(), 0);
    if (!picked.empty()) {
      GridIndex cidx(coarse, std::max(1e-9, detail::idx_cell_hint(coarse)));
      for (std::size_t i = 0; i < stage.size(); ++i)
        up[i] = cidx.knn_query(coarse, stage.point(i), 1)[0].id;
    }
    plan.upsample.push_back(std::move(up));

    stage = std::move(coarse);
    radius *= 2.0;
  }
  return plan;
}

/// Walk a full-resolution point down the plan: the stage-`depth` coarse
/// point that represents it (composition of upsample maps).
inline int compose_to_stage(const SamplingPlan& plan, std::size_t depth, int point_id) {
  int id = point_id;
  for (std::size_t s = 0; s < depth; ++s) id = plan.upsample[s][id];
  return id;
}

}  // namespace fgnet

#endif  // FGNET_SAMPLE_PLAN_HPP
