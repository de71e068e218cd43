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

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "illumkit/nn/tensor.hpp"

namespace illumkit::nn {

enum class LayerKind {
  conv2d,
  relu,
  maxpool2x2,
  fully_connected,
  concat_channels,
  eltwise_sum,
  eltwise_prod,
  flatten,
};

std::string_view to_string(LayerKind kind);

/// Static description of one layer. The attribute set fully determines the
/// output shape for a given list of input shapes.
struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  std::string name;
  // conv2d
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 0;
  std::size_t stride = 1;
  std::size_t padding = 0;
  // fully_connected
  std::size_t in_units = 0;
  std::size_t out_units = 0;

  static LayerSpec conv2d(std::string name, std::size_t in, std::size_t out, std::size_t kernel,
                          std::size_t stride = 1, std::size_t padding = 0);
  static LayerSpec relu(std::string name);
  static LayerSpec maxpool2x2(std::string name);
  static LayerSpec fully_connected(std::string name, std::size_t in, std::size_t out);
  static LayerSpec concat_channels(std::string name);
  static LayerSpec eltwise_sum(std::string name);
  static LayerSpec eltwise_prod(std::string name);
  static LayerSpec flatten(std::string name);

  bool has_parameters() const noexcept {
    return kind == LayerKind::conv2d || kind == LayerKind::fully_connected;
  }
  /// {weight, bias} for conv2d / fully_connected, empty otherwise.
  std::vector<Shape> parameter_shapes() const;
  std::size_t min_inputs() const noexcept;
  std::size_t max_inputs() const noexcept;
  /// Multiply-accumulate count of one forward pass (0 for cheap layers).
  std::size_t forward_macs(const Shape& input) const;
};

/// Output shape for the given input shapes; throws ShapeError naming the layer
/// and the offending dimension on any mismatch.
Shape infer_shape(const LayerSpec& spec, std::span<const Shape> inputs);

template <typename T>
struct Parameter {
  Tensor<T> value;
  Tensor<T> grad;
  Tensor<T> momentum;
  /// Scales the learning rate; 0 freezes the parameter.
  double lr_mult = 1.0;

  Parameter() = default;
  explicit Parameter(Tensor<T> v) : value(std::move(v)), grad(value.shape()), momentum(value.shape()) {}

  void zero_grad() { grad.fill(T{0}); }
};

template <typename T>
using ConstParams = std::vector<const Parameter<T>*>;
template <typename T>
using Inputs = std::vector<const Tensor<T>*>;

template <typename T>
Tensor<T> layer_forward(const LayerSpec& spec, const ConstParams<T>& params, const Inputs<T>& inputs);

/// Backward pass writing parameter gradients into caller-owned sinks.
/// `param_grads[i]` receives the accumulated gradient of `params[i]`; a null
/// sink skips that parameter. Input gradients are returned only when
/// `need_input_grads` is set (otherwise the result is empty).
template <typename T>
std::vector<Tensor<T>> layer_backward_into(const LayerSpec& spec, const ConstParams<T>& params,
                                           const Inputs<T>& inputs, const Tensor<T>& grad_out,
                                           const std::vector<Tensor<T>*>& param_grads,
                                           bool need_input_grads = true);

/// Backward pass accumulating parameter gradients into `params[i]->grad`.
/// Callers zero the gradients between steps.
template <typename T>
std::vector<Tensor<T>> layer_backward(const LayerSpec& spec, const std::vector<Parameter<T>*>& params,
                                      const Inputs<T>& inputs, const Tensor<T>& grad_out);

}  // namespace illumkit::nn
