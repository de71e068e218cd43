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
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "illumkit/nets/arch.hpp"
#include "illumkit/nn/checkpoint.hpp"
#include "illumkit/nn/sequential.hpp"

namespace illumkit::nets {

enum class Stream { central, surround };

/// Standard deviation of the zero-mean Gaussian used for 3-unit output layers.
inline constexpr double kOutputInitStd = 0.01;

/// Contextual network, optional refinement network and optional per-stream
/// pretraining heads, all drawing on one registry of named parameters.
///
/// Parameter names:
///   ctx.central.convB_I / ctx.surround.convB_I   stream convolutions
///   ctx.stacked.convB_I                           two_channel stream
///   ctx.fcK_1                                     decision head
///   aux.central.fcK / aux.surround.fcK            stream pretraining heads
///   ref.convB_I, ref.fcK_2, ref.fcK_3             refinement trunk and heads
/// each followed by ".weight" or ".bias". The siamese variant binds the
/// surround stream to the ctx.central.* parameters.
///
/// Models own their parameters through shared pointers and are move-only;
/// use clone() for an independent copy.
template <typename T>
class Model {
 public:
  using Chain = nn::Sequential<T>;

  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;
  Model(Model&&) noexcept = default;
  Model& operator=(Model&&) noexcept = default;

  const ArchConfig& arch() const noexcept { return arch_; }

  /// First stream: the central patch, or the 6-channel stack for two_channel.
  const Chain& central_stream() const noexcept { return central_; }
  /// Empty for central_only and two_channel.
  const Chain& surround_stream() const noexcept { return surround_; }
  bool has_surround() const noexcept { return !surround_.empty(); }
  /// eltwise_sum (contextual) or concat_channels (siamese variants).
  const nn::LayerSpec& fusion() const noexcept { return fusion_; }
  /// flatten followed by the fully connected decision layers.
  const Chain& context_head() const noexcept { return context_head_; }
  const Chain& stream_head(Stream s) const;

  bool has_refinement() const noexcept { return !refine_trunk_.empty(); }
  const nn::LayerSpec& stack() const noexcept { return stack_; }
  const Chain& refine_trunk() const noexcept { return refine_trunk_; }
  /// Produces e2.
  const Chain& refine_head() const noexcept { return refine_head_; }
  /// fc6_3 / fc7_3 / fc8_3, produces e3.
  const Chain& intermediate_head() const noexcept { return intermediate_head_; }

  const std::map<std::string, nn::ParamPtr<T>>& parameters() const noexcept { return params_; }
  /// Unique parameters ordered by name.
  std::vector<nn::ParamPtr<T>> parameter_list() const;
  nn::ParamPtr<T> find(const std::string& name) const;
  /// Total number of scalars.
  std::size_t scalar_count() const;

  void set_lr_mult(double mult);
  void zero_grad();

  nn::Checkpoint to_checkpoint(const std::string& stage_id, std::uint64_t step) const;
  /// Copies values, momentum and lr_mult of every parameter; the checkpoint
  /// must name exactly this model's parameters with matching shapes.
  void load_checkpoint(const nn::Checkpoint& ckpt);
  Model clone() const;

  template <typename U>
  friend Model<U> build_net(const ArchConfig& arch, std::uint64_t seed);

 private:
  Model() = default;

  ArchConfig arch_;
  std::map<std::string, nn::ParamPtr<T>> params_;
  Chain central_;
  Chain surround_;
  nn::LayerSpec fusion_;
  Chain context_head_;
  Chain aux_central_;
  Chain aux_surround_;
  nn::LayerSpec stack_;
  Chain refine_trunk_;
  Chain refine_head_;
  Chain intermediate_head_;
};

/// Builds a freshly initialised model. Convolutions and hidden fully
/// connected layers draw weights from N(0, 2/fan_in); 3-unit output layers
/// from N(0, kOutputInitStd^2); biases start at zero. Each parameter's draw is
/// seeded from (seed, name), so equal names get equal values across variants.
template <typename T>
Model<T> build_net(const ArchConfig& arch, std::uint64_t seed);

/// Rebuilds the architecture recorded in a checkpoint and loads its values.
template <typename T>
Model<T> model_from_checkpoint(const nn::Checkpoint& ckpt);

}  // namespace illumkit::nets
