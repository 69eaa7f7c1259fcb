// Copyright (c) 2026 fgnet contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef FGNET_FGNET_HPP
#define FGNET_FGNET_HPP

#include "fgnet/ad/tensor.hpp"
#include "fgnet/conv/fg_conv.hpp"
#include "fgnet/conv/kernel_points.hpp"
#include "fgnet/core/grid_index.hpp"
#include "fgnet/core/point_cloud.hpp"
#include "fgnet/core/rng.hpp"
#include "fgnet/data/cloud_io.hpp"
#include "fgnet/data/metrics.hpp"
#include "fgnet/data/scene.hpp"
#include "fgnet/filter/outlier_filter.hpp"
#include "fgnet/io/checkpoint.hpp"
#include "fgnet/io/config.hpp"
#include "fgnet/net/global_attention.hpp"
#include "fgnet/net/losses.hpp"
#include "fgnet/net/network.hpp"
#include "fgnet/sample/gumbel_sampler.hpp"
#include "fgnet/sample/plan.hpp"
#include "fgnet/sample/sampling.hpp"
#include "fgnet/train/adam.hpp"
#include "fgnet/train/augment.hpp"
#include "fgnet/train/gradcheck.hpp"
#include "fgnet/train/trainer.hpp"

#endif  // FGNET_FGNET_HPP
