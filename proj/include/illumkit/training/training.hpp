// Copyright 2026 The illumkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "illumkit/color/color.hpp"
#include "illumkit/nets/model.hpp"
#include "illumkit/nn/checkpoint.hpp"
#include "illumkit/nn/sgd.hpp"
#include "illumkit/sampling/sampling.hpp"

namespace illumkit::training {

/// One training example: a patch pair and the image's ground-truth light.
struct Sample {
  nn::Tensor<float> pc;
  nn::Tensor<float> ps;
  color::Rgb gt{};
  /// Index of the source image.
  std::size_t image = 0;
};

enum class LossTarget { stream, e1, e2, final };

struct StagePlan {
  std::string stage_id;
  /// Parameter name patterns (regular expressions matched from the start of
  /// the name) trained in this stage; everything else gets lr_mult 0.
  std::vector<std::string> trainable;
  /// Patterns of parameters that start from a fresh Gaussian draw instead of
  /// the previous checkpoint.
  std::vector<std::string> fresh;
  /// (destination prefix, source prefix): non-fresh parameters under the
  /// destination prefix are copied from the source-prefixed checkpoint entry.
  std::vector<std::pair<std::string, std::string>> copy_from;
  LossTarget target = LossTarget::e1;
  /// Which stream a `stream` target trains.
  nets::Stream stream = nets::Stream::central;
  /// Stage whose checkpoint must precede this one; empty for the first stage.
  std::string requires_stage;

  bool is_trainable(const std::string& name) const;
  bool is_fresh(const std::string& name) const;
};

/// Stage ids run for an architecture, in order: 1a/1b pretrain the streams
/// (two-stream variants train both, single-stream ones only 1a, two_channel
/// none), 2 trains the decision head, 3 and 4 the refinement network when the
/// architecture has one.
std::vector<std::string> stage_sequence(const nets::ArchConfig& arch);
StagePlan plan_for(const std::string& stage_id, const nets::ArchConfig& arch);

struct TrainConfig {
  nn::SgdHyper sgd;
  std::size_t batch_size = 23;
  /// Steps per stage.
  std::size_t max_steps = 160000;
  /// Progress callback period in steps; 0 disables it.
  std::size_t eval_every = 0;
  std::uint64_t seed = 0;
  sampling::SamplerConfig sampler;
  nets::ArchConfig arch;

  /// Small-scale profile: S = 32, 2000 steps per stage, batch 16, base lr 0.003.
  static TrainConfig desk_profile();
  /// Full-scale settings: batch 23, 160K steps, S = 224 and a VGG-16-shaped
  /// backbone (five blocks of two convolutions, 4096-wide heads).
  static TrainConfig paper_profile();
  void validate() const;
};

struct LossPoint {
  std::uint64_t step = 0;
  double loss = 0.0;
  double lr = 0.0;
};

struct StageResult {
  nn::Checkpoint checkpoint;
  std::vector<LossPoint> trajectory;
  /// Set when a non-finite loss stopped the stage; `checkpoint` then holds
  /// the last finite state.
  bool aborted = false;
  std::string message;
};

/// Builds the stage's starting model: parameters come from `prev` (required
/// unless the plan has no predecessor), fresh prefixes from a Gaussian draw
/// seeded by `seed`, and lr_mult is 1 for trainable parameters and 0 for the
/// rest. Momentum of trainable parameters restarts at zero.
nets::Model<float> init_stage(const StagePlan& plan, const nets::ArchConfig& arch, const nn::Checkpoint* prev,
                              std::uint64_t seed);

using ProgressFn = std::function<void(const std::string& stage_id, const LossPoint&)>;

/// Runs max_steps SGD steps on the plan's loss target. Batches are drawn from
/// a seeded reshuffle of `data`; per-sample gradients are reduced in a fixed
/// order, so results do not depend on the thread count.
StageResult train_stage(nets::Model<float>& model, const StagePlan& plan, const std::vector<Sample>& data,
                        const TrainConfig& cfg, const ProgressFn& progress = {});

struct PipelineResult {
  /// One entry per executed stage, in order.
  std::vector<std::pair<std::string, StageResult>> stages;
  const nn::Checkpoint& final_checkpoint() const { return stages.back().second.checkpoint; }
};

/// Runs the stages of `stage_sequence(cfg.arch)` from `first_stage` on,
/// chaining checkpoints. Starting past the first stage needs `resume`, the
/// checkpoint of the preceding stage. `on_stage` sees each finished stage.
PipelineResult run_pipeline(const std::vector<Sample>& data, const TrainConfig& cfg,
                            const std::string& first_stage = {}, const nn::Checkpoint* resume = nullptr,
                            const std::function<void(const std::string&, const StageResult&)>& on_stage = {},
                            const ProgressFn& progress = {});

/// Samples M patch pairs from each image (sampler seed mixed with the image
/// index). Images whose sampling fails raise DataError naming the index.
std::vector<Sample> make_samples(const std::vector<color::LinearImage>& images, const std::vector<color::Rgb>& gts,
                                 const sampling::SamplerConfig& sampler, const std::vector<std::size_t>& indices);

}  // namespace illumkit::training
