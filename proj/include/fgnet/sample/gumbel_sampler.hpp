// Copyright (c) 2026 fgnet contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef FGNET_SAMPLE_GUMBEL_SAMPLER_HPP
#define FGNET_SAMPLE_GUMBEL_SAMPLER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fgnet/ad/tensor.hpp"
#include "fgnet/core/point_cloud.hpp"
#include "fgnet/core/rng.hpp"

namespace fgnet {

/// Learnable point selector. Each of the `select_count` rows of the weight
/// matrix scores every input point; selection happens through a
/// Gumbel-perturbed softmax (soft, differentiable) or Gumbel-Max (hard).
struct GumbelSampler {
  ad::Tensor weights;       // select_count x (3 + feature_width)
  double temperature = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t noise_salt = 0;  // trainer advances this per epoch for fresh draws
  bool zero_noise = false;  // test hook: suppress the Gumbel perturbation

  static constexpr std::size_t kMaxPoints = 100000;  // use IDS above this size

  static GumbelSampler make(int select_count, int feature_width, std::uint64_t seed,
                            double temperature = 1.0) {
    Rng rng(seed ^ 0xA5F152C3D4E5F607ull);
    std::vector<double> w(static_cast<std::size_t>(select_count) * (3 + feature_width));
    const double scale = 1.0 / std::sqrt(3.0 + feature_width);
    for (auto& x : w) x = rng.uniform(-scale, scale);
    GumbelSampler s;
    s.weights = ad::Tensor::param(select_count, 3 + feature_width, std::move(w), "gumbel.weights");
    s.temperature = temperature;
    s.seed = seed;
    return s;
  }

  int select_count() const { return weights.rows(); }
};

namespace detail {

/// One Gumbel(0,1) value per column for one selection row; redraw_round
/// advances the stream so collision redraws stay deterministic.
inline std::vector<double> gumbel_noise_row(const GumbelSampler& s, int row, int n,
                                            int redraw_round) {
  std::vector<double> g(n, 0.0);
  if (s.zero_noise) return g;
  Rng rng(s.seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(row + 1) +
          0xBF58476D1CE4E5B9ull * static_cast<std::uint64_t>(redraw_round) +
          0x94D049BB133111EBull * s.noise_salt);
  for (int i = 0; i < n; ++i) g[i] = rng.gumbel();
  return g;
}

/// Stacks the cloud into the point matrix P = [coords | features], N x (3+f).
inline ad::Tensor point_matrix(const PointCloud& cloud, bool requires_grad = false) {
  const int n = static_cast<int>(cloud.size());
  const int f = cloud.feature_width;
  std::vector<double> v(static_cast<std::size_t>(n) * (3 + f));
  for (int i = 0; i < n; ++i) {
    const double* p = cloud.point_ptr(i);
    double* row = v.data() + static_cast<std::size_t>(i) * (3 + f);
    row[0] = p[0];
    row[1] = p[1];
    row[2] = p[2];
    for (int c = 0; c < f; ++c) row[3 + c] = cloud.features[static_cast<std::size_t>(i) * f + c];
  }
  return ad::Tensor::from_values(n, 3 + f, std::move(v), requires_grad);
}

}  // namespace detail

/// Soft selection. Per selection row: scores = softmax(W row . P^T), then the
/// Gumbel-softmax y = softmax((log s + g) / tau). Returns the soft selection
/// matrix (select_count x N) and the soft points (select_count x (3+f)).
/// Differentiable with respect to both the weights and the point matrix.
inline std::pair<ad::Tensor, ad::Tensor> gumbel_soft_select(const GumbelSampler& sampler,
                                                            const ad::Tensor& points,
                                                            int redraw_round = 0) {
  if (!(sampler.temperature > 0.0))
    throw std::invalid_argument("gumbel sampler: temperature must be > 0");
  const std::size_t n = static_cast<std::size_t>(points.rows());
  if (n > GumbelSampler::kMaxPoints)
    throw std::invalid_argument(
        "gumbel sampler: cloud has " + std::to_string(n) + " points (cap " +
        std::to_string(GumbelSampler::kMaxPoints) + "); use inverse-density sampling here");
  if (points.cols() != sampler.weights.cols())
    throw std::invalid_argument("gumbel sampler: point width " + std::to_string(points.cols()) +
                                " does not match weight width " +
                                std::to_string(sampler.weights.cols()));

  const ad::Tensor logits = ad::matmul(sampler.weights, ad::transpose(points));
  const ad::Tensor scores = ad::softmax_rows(logits);

  // log s + g, then a temperature-scaled softmax per row
  std::vector<double> noise(static_cast<std::size_t>(sampler.select_count()) * n);
  for (int r = 0; r < sampler.select_count(); ++r) {
    const auto g = detail::gumbel_noise_row(sampler, r, static_cast<int>(n), redraw_round);
    std::copy(g.begin(), g.end(), noise.begin() + static_cast<std::size_t>(r) * n);
  }
  const ad::Tensor gumbel =
      ad::Tensor::from_values(sampler.select_count(), static_cast<int>(n), std::move(noise));
  const ad::Tensor perturbed = ad::add(ad::log_(scores, 1e-20), gumbel);
  const ad::Tensor soft = ad::softmax_rows(ad::scalar_mul(perturbed, 1.0 / sampler.temperature));
  const ad::Tensor soft_points = ad::matmul(soft, points);
  return {soft, soft_points};
}

inline std::pair<ad::Tensor, ad::Tensor> gumbel_soft_select(const GumbelSampler& sampler,
                                                            const PointCloud& cloud) {
  return gumbel_soft_select(sampler, detail::point_matrix(cloud));
}

/// Hard Gumbel-Max selection: per row, argmax(log s + g). A row whose winner
/// is already taken redraws its noise (up to 32 rounds) and then falls back
/// to its best unused index. Deterministic given the sampler seed.
inline std::vector<int> gumbel_hard_select(const GumbelSampler& sampler,
                                           const ad::Tensor& points) {
  const int n = points.rows();
  const int rows = sampler.select_count();
  if (rows > n)
    throw std::invalid_argument("gumbel sampler: cannot select " + std::to_string(rows) +
                                " from " + std::to_string(n) + " points");
  const std::size_t ncheck = static_cast<std::size_t>(n);
  if (ncheck > GumbelSampler::kMaxPoints)
    throw std::invalid_argument("gumbel sampler: cloud above the point cap; use IDS here");

  // Hard selection only needs forward values.
  std::vector<double> logits(static_cast<std::size_t>(rows) * n);
  const auto& w = sampler.weights.values();
  const auto& p = points.values();
  const int width = points.cols();
  for (int r = 0; r < rows; ++r)
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int c = 0; c < width; ++c)
        acc += w[static_cast<std::size_t>(r) * width + c] *
               p[static_cast<std::size_t>(i) * width + c];
      logits[static_cast<std::size_t>(r) * n + i] = acc;
    }

  // row-wise softmax -> log scores
  std::vector<double> log_scores(logits.size());
  for (int r = 0; r < rows; ++r) {
    const double* row = logits.data() + static_cast<std::size_t>(r) * n;
    double* out = log_scores.data() + static_cast<std::size_t>(r) * n;
    double mx = row[0];
    for (int i = 1; i < n; ++i) mx = std::max(mx, row[i]);
    double z = 0.0;
    for (int i = 0; i < n; ++i) z += std::exp(row[i] - mx);
    const double logz = std::log(z) + mx;
    for (int i = 0; i < n; ++i) out[i] = row[i] - logz;
  }

  std::vector<int> picked(rows, -1);
  std::vector<char> used(n, 0);
  for (int r = 0; r < rows; ++r) {
    const double* ls = log_scores.data() + static_cast<std::size_t>(r) * n;
    int winner = -1;
    for (int round = 0; round < 32 && winner < 0; ++round) {
      const auto g = detail::gumbel_noise_row(sampler, r, n, round);
      int arg = 0;
      double best = ls[0] + g[0];
      for (int i = 1; i < n; ++i) {
        const double v = ls[i] + g[i];
        if (v > best) {
          best = v;
          arg = i;
        }
      }
      if (!used[arg]) winner = arg;
      if (sampler.zero_noise) break;  // redraws cannot change anything
    }
    if (winner < 0) {
      // fall back to the best-scoring unused index
      int arg = -1;
      double best = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i) {
        if (used[i]) continue;
        if (ls[i] > best) {
          best = ls[i];
          arg = i;
        }
      }
      winner = arg;
    }
    picked[r] = winner;
    used[winner] = 1;
  }
  return picked;
}

inline std::vector<int> gumbel_hard_select(const GumbelSampler& sampler, const PointCloud& cloud) {
  return gumbel_hard_select(sampler, detail::point_matrix(cloud));
}

}  // namespace fgnet

#endif  // FGNET_SAMPLE_GUMBEL_SAMPLER_HPP
