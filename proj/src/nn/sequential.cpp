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

#include "illumkit/nn/sequential.hpp"

#include <algorithm>

namespace illumkit::nn {

template <typename T>
GradientBuffer<T>::GradientBuffer(const std::vector<ParamPtr<T>>& params) {
  for (const auto& p : params) {
    params_.push_back(p.get());
    grads_.emplace_back(p->value.shape());
  }
}

template <typename T>
Tensor<T>* GradientBuffer<T>::find(const Parameter<T>& p) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i] == &p) return &grads_[i];
  }
  return nullptr;
}

template <typename T>
GradSink<T> GradientBuffer<T>::sink() {
  return [this](Parameter<T>& p) { return find(p); };
}

template <typename T>
void GradientBuffer<T>::zero() {
  for (auto& g : grads_) g.fill(T{0});
}

template <typename T>
void GradientBuffer<T>::add_to_params() const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& dst = params_[i]->grad;
    const auto& src = grads_[i];
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
}

template <typename T>
void Sequential<T>::add(LayerSpec spec, std::vector<ParamPtr<T>> params) {
  if (spec.min_inputs() != 1) throw ShapeError("layer '" + spec.name + "' is not a single-input layer");
  const auto shapes = spec.parameter_shapes();
  if (params.size() != shapes.size()) {
    throw ShapeError("layer '" + spec.name + "' expects " + std::to_string(shapes.size()) + " parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i] || params[i]->value.shape() != shapes[i]) {
      throw ShapeError("layer '" + spec.name + "' parameter " + std::to_string(i) + " has the wrong shape");
    }
  }
  nodes_.push_back({std::move(spec), std::move(params)});
}

template <typename T>
Shape Sequential<T>::output_shape(const Shape& input) const {
  Shape s = input;
  for (const auto& n : nodes_) {
    const Shape in[] = {s};
    s = infer_shape(n.spec, in);
  }
  return s;
}

namespace {
template <typename T>
ConstParams<T> const_params(const std::vector<ParamPtr<T>>& params) {
  ConstParams<T> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(p.get());
  return out;
}
}  // namespace

template <typename T>
Tensor<T> Sequential<T>::forward(const Tensor<T>& x) const {
  Tensor<T> cur = x;
  for (const auto& n : nodes_) cur = layer_forward<T>(n.spec, const_params(n.params), {&cur});
  return cur;
}

template <typename T>
const Tensor<T>& Sequential<T>::forward(const Tensor<T>& x, Trace& trace) const {
  trace.inputs.clear();
  trace.inputs.reserve(nodes_.size());
  Tensor<T> cur = x;
  for (const auto& n : nodes_) {
    trace.inputs.push_back(std::move(cur));
    cur = layer_forward<T>(n.spec, const_params(n.params), {&trace.inputs.back()});
  }
  trace.output = std::move(cur);
  return trace.output;
}

template <typename T>
Tensor<T> Sequential<T>::backward(const Trace& trace, const Tensor<T>& grad_out, const GradSink<T>& sink,
                                  bool need_input_grad) const {
  if (trace.inputs.size() != nodes_.size()) throw ShapeError("trace does not belong to this chain");
  Tensor<T> grad = grad_out;
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    const Node& n = nodes_[i];
    std::vector<Tensor<T>*> sinks;
    sinks.reserve(n.params.size());
    for (const auto& p : n.params) sinks.push_back(sink ? sink(*p) : nullptr);

    // Nothing upstream needs a gradient once the remaining layers are frozen.
    bool upstream_needs = need_input_grad;
    if (!upstream_needs) {
      for (std::size_t j = 0; j < i && !upstream_needs; ++j) {
        for (const auto& p : nodes_[j].params) {
          if (sink && sink(*p) != nullptr) {
            upstream_needs = true;
            break;
          }
        }
      }
    }
    const bool any_sink = std::any_of(sinks.begin(), sinks.end(), [](auto* s) { return s != nullptr; });
    if (!upstream_needs && !any_sink) return {};
    auto grads = layer_backward_into<T>(n.spec, const_params(n.params), {&trace.inputs[i]}, grad, sinks,
                                        upstream_needs);
    if (!upstream_needs) return {};
    grad = std::move(grads.front());
  }
  return grad;
}

template <typename T>
std::vector<ParamPtr<T>> Sequential<T>::parameters() const {
  std::vector<ParamPtr<T>> out;
  for (const auto& n : nodes_) {
    for (const auto& p : n.params) {
      if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
    }
  }
  return out;
}

template <typename T>
std::vector<std::uint8_t> Sequential<T>::routing_signature(const Trace& trace) const {
  std::vector<std::uint8_t> sig;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Tensor<T>& in = trace.inputs.at(i);
    if (nodes_[i].spec.kind == LayerKind::relu) {
      for (std::size_t k = 0; k < in.size(); ++k) sig.push_back(in[k] > T{0} ? 1 : 0);
    } else if (nodes_[i].spec.kind == LayerKind::maxpool2x2) {
      for (std::size_t c = 0; c < in.dim(0); ++c) {
        for (std::size_t y = 0; y + 1 < in.dim(1); y += 2) {
          for (std::size_t x = 0; x + 1 < in.dim(2); x += 2) {
            std::uint8_t best = 0;
            T v = in.at(c, y, x);
            for (std::uint8_t k = 1; k < 4; ++k) {
              const T w = in.at(c, y + k / 2, x + k % 2);
              if (w > v) {
                v = w;
                best = k;
              }
            }
            sig.push_back(best);
          }
        }
      }
    }
  }
  return sig;
}

template <typename T>
static std::size_t count_params(const std::vector<ParamPtr<T>>& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p->value.size();
  return n;
}

std::size_t parameter_count(const std::vector<ParamPtr<float>>& params) { return count_params(params); }
std::size_t parameter_count(const std::vector<ParamPtr<double>>& params) { return count_params(params); }

template class GradientBuffer<float>;
template class GradientBuffer<double>;
template class Sequential<float>;
template class Sequential<double>;

}  // namespace illumkit::nn
