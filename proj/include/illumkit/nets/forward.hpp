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
#include <string_view>
#include <vector>

#include "illumkit/color/color.hpp"
#include "illumkit/nets/model.hpp"

namespace illumkit::nets {

/// A raw 3-unit network output turned into a usable illuminant. Channels are
/// clamped to >= kMinChannel before normalization; the estimate is flagged
/// degenerate when any raw channel needed clamping or a normalized channel is
/// still <= kMinChannel.
struct FinalEstimate {
  color::Illuminant e;
  bool degenerate = false;
};

FinalEstimate finalize_estimate(const color::Rgb& raw);

template <typename T>
color::Rgb to_rgb(const nn::Tensor<T>& t);

/// Diagonal correction of `patch`, or `patch` itself for a degenerate estimate.
template <typename T>
nn::Tensor<T> correct_or_pass(const FinalEstimate& est, const nn::Tensor<T>& patch);

/// Fused stream features feeding the decision head. central_only ignores
/// `ps`; two_channel stacks (pc, ps) into one 6-channel input.
template <typename T>
nn::Tensor<T> context_features(const Model<T>& model, const nn::Tensor<T>& pc, const nn::Tensor<T>& ps);

template <typename T>
struct ContextualResult {
  nn::Tensor<T> raw;
  FinalEstimate e1;
  nn::Tensor<T> p1;
};

template <typename T>
ContextualResult<T> contextual_forward(const Model<T>& model, const nn::Tensor<T>& pc, const nn::Tensor<T>& ps);

/// Trunk output F over CAT(pc, p1); channels 0-2 hold pc.
template <typename T>
nn::Tensor<T> refinement_features(const Model<T>& model, const nn::Tensor<T>& pc, const nn::Tensor<T>& p1);

template <typename T>
struct RefinementResult {
  nn::Tensor<T> e2_raw;
  nn::Tensor<T> e3_raw;
  /// e2_raw * e3_raw, element-wise.
  nn::Tensor<T> product_raw;
  FinalEstimate e2;
  FinalEstimate e_final;
  nn::Tensor<T> p2;
};

template <typename T>
RefinementResult<T> refinement_forward(const Model<T>& model, const nn::Tensor<T>& pc, const nn::Tensor<T>& p1);

/// Which network output serves as the patch estimate.
enum class Output {
  central_stream,  // aux.central head (after stage 1a)
  surround_stream, // aux.surround head (after stage 1b)
  e1,
  e2,
  final,
};

std::string_view to_string(Output o);
/// The output trained by the stage that produced a checkpoint.
Output output_for_stage(std::string_view stage_id);

template <typename T>
FinalEstimate estimate_patch(const Model<T>& model, const nn::Tensor<T>& pc, const nn::Tensor<T>& ps, Output out);

/// Sum of the squared-error losses on raw e1, e2 and e2*e3 against `gt`,
/// differentiated through the whole contextual + refinement composition
/// (including the diagonal correction producing P1). Parameter gradients go
/// to `sink` when one is given.
template <typename T>
struct PipelineLoss {
  double loss = 0.0;
  /// ReLU/max-pool/clamp routing of the pass; equal signatures mean the same
  /// smooth piece.
  std::vector<std::uint8_t> routing;
  nn::Tensor<T> grad_pc;
  nn::Tensor<T> grad_ps;
};

template <typename T>
PipelineLoss<T> pipeline_loss(const Model<T>& model, const nn::Tensor<T>& pc, const nn::Tensor<T>& ps,
                              const color::Rgb& gt, const nn::GradSink<T>* sink);

}  // namespace illumkit::nets
