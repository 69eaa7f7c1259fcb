// Copyright (c) 2026 fgnet contributors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end training loop: a loader thread prepares the next batch
// (augmentation, optional filtering, sampling plan, neighborhoods) while
// the trainer consumes the current one. Deterministic given the seed.

#ifndef FGNET_TRAIN_TRAINER_HPP
#define FGNET_TRAIN_TRAINER_HPP

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "fgnet/filter/outlier_filter.hpp"
#include "fgnet/io/checkpoint.hpp"
#include "fgnet/io/config.hpp"
#include "fgnet/net/losses.hpp"
#include "fgnet/net/network.hpp"
#include "fgnet/sample/plan.hpp"
#include "fgnet/train/adam.hpp"
#include "fgnet/train/augment.hpp"

namespace fgnet {

struct EpochRecord {
  int epoch = 0;
  LossReport loss;
  double batch_accuracy = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  bool diverged = false;
  int epochs_run = 0;
  double final_accuracy = 0.0;  // on the canonical (un-augmented) first scene
};

namespace detail {

struct PreparedBatch {
  StageContext ctx;
  std::vector<int> labels;
  int epoch = 0;
};

/// Depth-1 handoff queue: the loader blocks once one batch is pending.
class BatchQueue {
 public:
  void push(PreparedBatch&& b) {
    std::unique_lock<std::mutex> lk(mu_);
    cv_space_.wait(lk, [&] { return !slot_.has_value() || closed_; });
    if (closed_) return;
    slot_ = std::move(b);
    cv_item_.notify_one();
  }

  std::optional<PreparedBatch> pop() {
    std::unique_lock<std::mutex> lk(mu_);
    cv_item_.wait(lk, [&] { return slot_.has_value() || closed_; });
    if (!slot_.has_value()) return std::nullopt;
    std::optional<PreparedBatch> out = std::move(slot_);
    slot_.reset();
    cv_space_.notify_one();
    return out;
  }

  void close() {
    std::lock_guard<std::mutex> lk(mu_);
    closed_ = true;
    cv_item_.notify_all();
    cv_space_.notify_all();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_item_, cv_space_;
  std::optional<PreparedBatch> slot_;
  bool closed_ = false;
};

inline PreparedBatch prepare_batch(const PointCloud& scene, const NetworkConfig& net_cfg,
                                   const TrainConfig& train_cfg, int epoch) {
  PointCloud batch = scene;
  if (train_cfg.augment)
    batch = augment(batch, train_cfg.seed * 7919 + static_cast<std::uint64_t>(epoch));
  if (train_cfg.filter) {
    auto [filtered, report] = filter(batch, train_cfg.filter_params);
    batch = std::move(filtered);
  }
  if (batch.size() > train_cfg.batch_points) {
    const auto keep = random_sample(batch, train_cfg.batch_points,
                                    train_cfg.seed * 31 + static_cast<std::uint64_t>(epoch));
    auto sorted = keep;
    std::sort(sorted.begin(), sorted.end());
    batch = batch.subset(sorted);
  }

  PlanParams pp;
  pp.schedule = net_cfg.schedule;
  pp.mode = net_cfg.use_gss ? SampleMode::igsam : SampleMode::ids;
  pp.seed = train_cfg.seed * 131 + static_cast<std::uint64_t>(epoch);
  const SamplingPlan plan = build_plan(batch, pp);

  PreparedBatch out;
  out.labels = batch.labels;
  out.ctx = prepare_stages(batch, plan, net_cfg);
  out.epoch = epoch;
  return out;
}

inline double fused_accuracy(const ad::Tensor& fused_logits, const std::vector<int>& labels) {
  const int n = fused_logits.rows();
  const int c = fused_logits.cols();
  if (n == 0) return 0.0;
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    int arg = 0;
    double best = fused_logits.at(i, 0);
    for (int k = 1; k < c; ++k)
      if (fused_logits.at(i, k) > best) {
        best = fused_logits.at(i, k);
        arg = k;
      }
    if (arg == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / n;
}

inline std::string format_csv_row(const EpochRecord& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                r.epoch, r.loss.fit, r.loss.repulsive, r.loss.contain, r.loss.kernel,
                r.loss.seg, r.loss.context, r.loss.total, r.batch_accuracy);
  return buf;
}

}  // namespace detail

inline const char* loss_csv_header() {
  return "epoch,fit,repulsive,contain,kernel,seg,context,total,accuracy\n";
}

/// Inference-style accuracy of the fused prediction on a scene.
inline double evaluate_accuracy(const FgNet& net, const PointCloud& scene, std::uint64_t seed) {
  PlanParams pp;
  pp.schedule = net.config.schedule;
  pp.mode = net.config.use_gss ? SampleMode::igsam : SampleMode::ids;
  pp.seed = seed;
  const SamplingPlan plan = build_plan(scene, pp);
  const StageContext ctx = prepare_stages(scene, plan, net.config);
  const ForwardResult fwd = net.forward(ctx, /*training=*/false);
  return detail::fused_accuracy(fwd.fused_logits, scene.labels);
}

/// Predicted labels of the fused head for a scene.
inline std::vector<int> predict_labels(const FgNet& net, const PointCloud& scene,
                                       std::uint64_t seed) {
  PlanParams pp;
  pp.schedule = net.config.schedule;
  pp.mode = net.config.use_gss ? SampleMode::igsam : SampleMode::ids;
  pp.seed = seed;
  const SamplingPlan plan = build_plan(scene, pp);
  const StageContext ctx = prepare_stages(scene, plan, net.config);
  const ForwardResult fwd = net.forward(ctx, /*training=*/false);
  std::vector<int> out(scene.size());
  for (std::size_t i = 0; i < scene.size(); ++i) {
    int arg = 0;
    double best = fwd.fused_logits.at(static_cast<int>(i), 0);
    for (int c = 1; c < fwd.fused_logits.cols(); ++c)
      if (fwd.fused_logits.at(static_cast<int>(i), c) > best) {
        best = fwd.fused_logits.at(static_cast<int>(i), c);
        arg = c;
      }
    out[i] = arg;
  }
  return out;
}

/// Train on labeled scenes. Writes per-epoch loss rows to `csv_path` and a
/// rolling checkpoint to `checkpoint_path` (every checkpoint_every epochs
/// and at the end). On divergence the rolling checkpoint keeps the last
/// good state. Scenes are cycled one per epoch.
inline TrainResult train(FgNet& net, const std::vector<PointCloud>& scenes,
                         const TrainConfig& train_cfg, const std::string& csv_path,
                         const std::string& checkpoint_path) {
  if (scenes.empty()) throw std::invalid_argument("train: dataset is empty");
  for (const auto& s : scenes)
    if (!s.has_labels()) throw std::invalid_argument("train: scenes must carry labels");

  std::vector<ad::Tensor> params = net.parameters();
  AdamState state = AdamState::make(params);
  const std::string config_echo = serialize_config(net.config, train_cfg);

  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("train: cannot write " + csv_path);
  csv << loss_csv_header();

  TrainResult result;
  save_checkpoint(checkpoint_path, config_echo, params);  // epoch-0 state

  if (train_cfg.epochs == 0) return result;

  detail::BatchQueue queue;
  std::thread loader([&] {
    for (int epoch = 0; epoch < train_cfg.epochs; ++epoch) {
      const PointCloud& scene = scenes[epoch % scenes.size()];
      queue.push(detail::prepare_batch(scene, net.config, train_cfg, epoch));
    }
    queue.close();
  });

  bool aborted = false;
  for (int epoch = 0; epoch < train_cfg.epochs; ++epoch) {
    auto batch = queue.pop();
    if (!batch) break;

    if (net.sampler) {
      net.sampler->temperature = train_cfg.tau_at(epoch);
      net.sampler->noise_salt = static_cast<std::uint64_t>(epoch) + 1;
    }

    const ForwardResult fwd = net.forward(batch->ctx, /*training=*/true);
    TotalLoss loss = total_loss(net, fwd, batch->labels);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = loss.report;
    rec.batch_accuracy = detail::fused_accuracy(fwd.fused_logits, batch->labels);

    if (!std::isfinite(loss.report.total)) {
      result.diverged = true;
      aborted = true;
      break;
    }

    for (auto& p : params) p.zero_grad();
    loss.value.backward();
    adam_step(params, state, train_cfg.adam);

    csv << detail::format_csv_row(rec);
    result.history.push_back(rec);
    result.epochs_run = epoch + 1;

    if (train_cfg.checkpoint_every > 0 && (epoch + 1) % train_cfg.checkpoint_every == 0)
      save_checkpoint(checkpoint_path, config_echo, params);
  }
  if (aborted) queue.close();
  loader.join();
  csv.close();

  if (!result.diverged) save_checkpoint(checkpoint_path, config_echo, params);
  result.final_accuracy = evaluate_accuracy(net, scenes[0], train_cfg.seed * 977 + 1);
  return result;
}

}  // namespace fgnet

#endif  // FGNET_TRAIN_TRAINER_HPP
