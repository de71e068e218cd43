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
#include <memory>
#include <vector>

#include "illumkit/nn/layers.hpp"

namespace illumkit::nn {

template <typename T>
using ParamPtr = std::shared_ptr<Parameter<T>>;

/// Destination for a parameter's gradient during backward; null skips it.
template <typename T>
using GradSink = std::function<Tensor<T>*(Parameter<T>&)>;

template <typename T>
GradSink<T> accumulate_into_params() {
  return [](Parameter<T>& p) { return &p.grad; };
}

/// Skips frozen parameters (lr_mult == 0); used by training where their
/// gradients would be discarded anyway.
template <typename T>
GradSink<T> accumulate_into_trainable() {
  return [](Parameter<T>& p) -> Tensor<T>* { return p.lr_mult == 0.0 ? nullptr : &p.grad; };
}

/// Private gradient storage for a fixed parameter set. Lets independent
/// samples be differentiated concurrently and reduced in a fixed order.
template <typename T>
class GradientBuffer {
 public:
  GradientBuffer() = default;
  explicit GradientBuffer(const std::vector<ParamPtr<T>>& params);

  Tensor<T>* find(const Parameter<T>& p);
  GradSink<T> sink();
  void zero();
  /// Adds every buffered gradient into the owning parameter's `grad`.
  void add_to_params() const;

 private:
  std::vector<Parameter<T>*> params_;
  std::vector<Tensor<T>> grads_;
};

/// A chain of single-input layers with their bound parameters.
template <typename T>
class Sequential {
 public:
  struct Node {
    LayerSpec spec;
    std::vector<ParamPtr<T>> params;
  };

  /// Activations recorded by a forward pass: inputs[i] is the input of node i.
  struct Trace {
    std::vector<Tensor<T>> inputs;
    Tensor<T> output;
  };

  void add(LayerSpec spec, std::vector<ParamPtr<T>> params = {});

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  bool empty() const noexcept { return nodes_.empty(); }
  Shape output_shape(const Shape& input) const;

  Tensor<T> forward(const Tensor<T>& x) const;
  const Tensor<T>& forward(const Tensor<T>& x, Trace& trace) const;

  /// Returns the gradient w.r.t. the chain input when `need_input_grad`,
  /// otherwise an empty tensor.
  Tensor<T> backward(const Trace& trace, const Tensor<T>& grad_out, const GradSink<T>& sink,
                     bool need_input_grad = true) const;

  /// Unique parameters in first-use order.
  std::vector<ParamPtr<T>> parameters() const;

  /// ReLU gate pattern and max-pool winners of a traced pass. Two passes with
  /// equal signatures lie on the same smooth piece of the network.
  std::vector<std::uint8_t> routing_signature(const Trace& trace) const;

 private:
  std::vector<Node> nodes_;
};

std::size_t parameter_count(const std::vector<ParamPtr<float>>& params);
std::size_t parameter_count(const std::vector<ParamPtr<double>>& params);

}  // namespace illumkit::nn
