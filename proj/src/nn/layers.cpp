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

#include "illumkit/nn/layers.hpp"

#include <Eigen/Core>

#include <limits>

namespace illumkit::nn {

namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;
template <typename T>
using VectorMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>;
template <typename T>
using ConstVectorMap = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>;

[[noreturn]] void mismatch(const LayerSpec& spec, const std::string& detail) {
  throw ShapeError("layer '" + spec.name + "' (" + std::string(to_string(spec.kind)) + "): " + detail);
}

std::size_t conv_out_extent(const LayerSpec& spec, std::size_t in, const char* axis) {
  const std::size_t padded = in + 2 * spec.padding;
  if (padded < spec.kernel) {
    mismatch(spec, std::string(axis) + " extent " + std::to_string(in) + " smaller than kernel " +
                       std::to_string(spec.kernel));
  }
  if ((padded - spec.kernel) % spec.stride != 0) {
    mismatch(spec, std::string(axis) + " extent " + std::to_string(in) + " not covered exactly by stride " +
                       std::to_string(spec.stride));
  }
  return (padded - spec.kernel) / spec.stride + 1;
}

void check_params(const LayerSpec& spec, std::size_t count) {
  const std::size_t expected = spec.has_parameters() ? 2 : 0;
  if (count != expected) {
    mismatch(spec, "expected " + std::to_string(expected) + " parameter tensors, got " + std::to_string(count));
  }
}

template <typename T>
void check_param_shapes(const LayerSpec& spec, const ConstParams<T>& params) {
  check_params(spec, params.size());
  const auto shapes = spec.parameter_shapes();
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i] == nullptr) mismatch(spec, "null parameter " + std::to_string(i));
    if (params[i]->value.shape() != shapes[i]) {
      mismatch(spec, "parameter " + std::to_string(i) + " has shape " + shape_string(params[i]->value.shape()) +
                         ", expected " + shape_string(shapes[i]));
    }
  }
}

template <typename T>
std::vector<Shape> input_shapes(const Inputs<T>& inputs) {
  std::vector<Shape> shapes;
  shapes.reserve(inputs.size());
  for (const auto* in : inputs) shapes.push_back(in->shape());
  return shapes;
}

// Unfolds a C x H x W input into a (C*k*k) x (Ho*Wo) matrix.
template <typename T>
void im2col(const LayerSpec& spec, const Tensor<T>& in, std::size_t ho, std::size_t wo, std::vector<T>& col) {
  const std::size_t c_in = in.dim(0), h = in.dim(1), w = in.dim(2), k = spec.kernel;
  const std::size_t s = spec.stride;
  const auto pad = static_cast<std::ptrdiff_t>(spec.padding);
  col.assign(c_in * k * k * ho * wo, T{0});
  std::size_t row = 0;
  for (std::size_t c = 0; c < c_in; ++c) {
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx, ++row) {
        T* dst = col.data() + row * ho * wo;
        for (std::size_t oy = 0; oy < ho; ++oy) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * s + ky) - pad;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
          const T* src = &in.at(c, static_cast<std::size_t>(iy), 0);
          for (std::size_t ox = 0; ox < wo; ++ox) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * s + kx) - pad;
            if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(w)) dst[oy * wo + ox] = src[ix];
          }
        }
      }
    }
  }
}

template <typename T>
void col2im(const LayerSpec& spec, const std::vector<T>& col, std::size_t ho, std::size_t wo, Tensor<T>& out) {
  const std::size_t c_in = out.dim(0), h = out.dim(1), w = out.dim(2), k = spec.kernel;
  const std::size_t s = spec.stride;
  const auto pad = static_cast<std::ptrdiff_t>(spec.padding);
  std::size_t row = 0;
  for (std::size_t c = 0; c < c_in; ++c) {
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx, ++row) {
        const T* src = col.data() + row * ho * wo;
        for (std::size_t oy = 0; oy < ho; ++oy) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * s + ky) - pad;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
          T* dst = &out.at(c, static_cast<std::size_t>(iy), 0);
          for (std::size_t ox = 0; ox < wo; ++ox) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * s + kx) - pad;
            if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(w)) dst[ix] += src[oy * wo + ox];
          }
        }
      }
    }
  }
}

template <typename T>
Tensor<T> conv_forward(const LayerSpec& spec, const Parameter<T>& weight, const Parameter<T>& bias,
                       const Tensor<T>& in, const Shape& out_shape) {
  const std::size_t ho = out_shape[1], wo = out_shape[2];
  const std::size_t patch = spec.in_channels * spec.kernel * spec.kernel;
  std::vector<T> col;
  im2col(spec, in, ho, wo, col);
  Tensor<T> out(out_shape);
  MatrixMap<T> y(out.data().data(), spec.out_channels, ho * wo);
  ConstMatrixMap<T> wm(weight.value.data().data(), spec.out_channels, patch);
  ConstMatrixMap<T> cm(col.data(), patch, ho * wo);
  y.noalias() = wm * cm;
  ConstVectorMap<T> b(bias.value.data().data(), spec.out_channels);
  y.colwise() += b;
  return out;
}

template <typename T>
Tensor<T> maxpool_forward(const Tensor<T>& in, const Shape& out_shape) {
  Tensor<T> out(out_shape);
  for (std::size_t c = 0; c < out_shape[0]; ++c) {
    for (std::size_t y = 0; y < out_shape[1]; ++y) {
      for (std::size_t x = 0; x < out_shape[2]; ++x) {
        const T a = in.at(c, 2 * y, 2 * x), b = in.at(c, 2 * y, 2 * x + 1);
        const T d = in.at(c, 2 * y + 1, 2 * x), e = in.at(c, 2 * y + 1, 2 * x + 1);
        out.at(c, y, x) = std::max(std::max(a, b), std::max(d, e));
      }
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::relu: return "relu";
    case LayerKind::maxpool2x2: return "maxpool2x2";
    case LayerKind::fully_connected: return "fully_connected";
    case LayerKind::concat_channels: return "concat_channels";
    case LayerKind::eltwise_sum: return "eltwise_sum";
    case LayerKind::eltwise_prod: return "eltwise_prod";
    case LayerKind::flatten: return "flatten";
  }
  return "unknown";
}

LayerSpec LayerSpec::conv2d(std::string name, std::size_t in, std::size_t out, std::size_t kernel,
                            std::size_t stride, std::size_t padding) {
  LayerSpec s;
  s.kind = LayerKind::conv2d;
  s.name = std::move(name);
  s.in_channels = in;
  s.out_channels = out;
  s.kernel = kernel;
  s.stride = stride;
  s.padding = padding;
  if (in == 0 || out == 0 || kernel == 0 || stride == 0) mismatch(s, "zero-sized attribute");
  return s;
}

LayerSpec LayerSpec::fully_connected(std::string name, std::size_t in, std::size_t out) {
  LayerSpec s;
  s.kind = LayerKind::fully_connected;
  s.name = std::move(name);
  s.in_units = in;
  s.out_units = out;
  if (in == 0 || out == 0) mismatch(s, "zero-sized attribute");
  return s;
}

namespace {
LayerSpec plain(LayerKind kind, std::string name) {
  LayerSpec s;
  s.kind = kind;
  s.name = std::move(name);
  return s;
}
}  // namespace

LayerSpec LayerSpec::relu(std::string name) { return plain(LayerKind::relu, std::move(name)); }
LayerSpec LayerSpec::maxpool2x2(std::string name) { return plain(LayerKind::maxpool2x2, std::move(name)); }
LayerSpec LayerSpec::concat_channels(std::string name) { return plain(LayerKind::concat_channels, std::move(name)); }
LayerSpec LayerSpec::eltwise_sum(std::string name) { return plain(LayerKind::eltwise_sum, std::move(name)); }
LayerSpec LayerSpec::eltwise_prod(std::string name) { return plain(LayerKind::eltwise_prod, std::move(name)); }
LayerSpec LayerSpec::flatten(std::string name) { return plain(LayerKind::flatten, std::move(name)); }

std::vector<Shape> LayerSpec::parameter_shapes() const {
  switch (kind) {
    case LayerKind::conv2d: return {{out_channels, in_channels, kernel, kernel}, {out_channels}};
    case LayerKind::fully_connected: return {{out_units, in_units}, {out_units}};
    default: return {};
  }
}

std::size_t LayerSpec::min_inputs() const noexcept {
  switch (kind) {
    case LayerKind::concat_channels:
    case LayerKind::eltwise_sum:
    case LayerKind::eltwise_prod: return 2;
    default: return 1;
  }
}

std::size_t LayerSpec::max_inputs() const noexcept {
  switch (kind) {
    case LayerKind::concat_channels:
    case LayerKind::eltwise_sum:
    case LayerKind::eltwise_prod: return std::numeric_limits<std::size_t>::max();
    default: return 1;
  }
}

std::size_t LayerSpec::forward_macs(const Shape& input) const {
  const Shape in[] = {input};
  if (kind == LayerKind::conv2d) {
    const Shape out = infer_shape(*this, in);
    return shape_size(out) * in_channels * kernel * kernel;
  }
  if (kind == LayerKind::fully_connected) return in_units * out_units;
  return 0;
}

Shape infer_shape(const LayerSpec& spec, std::span<const Shape> inputs) {
  if (inputs.size() < spec.min_inputs() || inputs.size() > spec.max_inputs()) {
    mismatch(spec, "got " + std::to_string(inputs.size()) + " inputs");
  }
  const Shape& in = inputs.front();
  switch (spec.kind) {
    case LayerKind::conv2d: {
      if (in.size() != 3) mismatch(spec, "expected C x H x W input, got " + shape_string(in));
      if (in[0] != spec.in_channels) {
        mismatch(spec, "dimension 0 (channels) is " + std::to_string(in[0]) + ", expected " +
                           std::to_string(spec.in_channels));
      }
      return {spec.out_channels, conv_out_extent(spec, in[1], "dimension 1 (height)"),
              conv_out_extent(spec, in[2], "dimension 2 (width)")};
    }
    case LayerKind::relu: return in;
    case LayerKind::maxpool2x2: {
      if (in.size() != 3) mismatch(spec, "expected C x H x W input, got " + shape_string(in));
      if (in[1] % 2 != 0 || in[2] % 2 != 0 || in[1] == 0 || in[2] == 0) {
        mismatch(spec, "dimensions 1/2 must be even and nonzero, got " + shape_string(in));
      }
      return {in[0], in[1] / 2, in[2] / 2};
    }
    case LayerKind::fully_connected: {
      if (in.size() != 1) mismatch(spec, "expected a flat input, got " + shape_string(in));
      if (in[0] != spec.in_units) {
        mismatch(spec, "dimension 0 is " + std::to_string(in[0]) + ", expected " + std::to_string(spec.in_units));
      }
      return {spec.out_units};
    }
    case LayerKind::concat_channels: {
      std::size_t channels = 0;
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        const Shape& s = inputs[i];
        if (s.size() != 3) mismatch(spec, "input " + std::to_string(i) + " is not C x H x W");
        if (s[1] != in[1] || s[2] != in[2]) {
          mismatch(spec, "input " + std::to_string(i) + " spatial dimensions " + shape_string(s) + " differ from " +
                             shape_string(in));
        }
        channels += s[0];
      }
      return {channels, in[1], in[2]};
    }
    case LayerKind::eltwise_sum:
    case LayerKind::eltwise_prod: {
      for (std::size_t i = 1; i < inputs.size(); ++i) {
        if (inputs[i] != in) {
          mismatch(spec, "input " + std::to_string(i) + " shape " + shape_string(inputs[i]) + " differs from " +
                             shape_string(in));
        }
      }
      return in;
    }
    case LayerKind::flatten: return {shape_size(in)};
  }
  mismatch(spec, "unknown layer kind");
}

template <typename T>
Tensor<T> layer_forward(const LayerSpec& spec, const ConstParams<T>& params, const Inputs<T>& inputs) {
  check_param_shapes(spec, params);
  const auto shapes = input_shapes(inputs);
  const Shape out_shape = infer_shape(spec, shapes);
  const Tensor<T>& in = *inputs.front();

  switch (spec.kind) {
    case LayerKind::conv2d: return conv_forward(spec, *params[0], *params[1], in, out_shape);
    case LayerKind::relu: {
      Tensor<T> out(out_shape);
      for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] > T{0} ? in[i] : T{0};
      return out;
    }
    case LayerKind::maxpool2x2: return maxpool_forward(in, out_shape);
    case LayerKind::fully_connected: {
      Tensor<T> out(out_shape);
      VectorMap<T> y(out.data().data(), spec.out_units);
      ConstMatrixMap<T> w(params[0]->value.data().data(), spec.out_units, spec.in_units);
      ConstVectorMap<T> x(in.data().data(), spec.in_units);
      ConstVectorMap<T> b(params[1]->value.data().data(), spec.out_units);
      y.noalias() = w * x;
      y += b;
      return out;
    }
    case LayerKind::concat_channels: {
      std::vector<T> data;
      data.reserve(shape_size(out_shape));
      for (const auto* t : inputs) data.insert(data.end(), t->data().begin(), t->data().end());
      return Tensor<T>(out_shape, std::move(data));
    }
    case LayerKind::eltwise_sum: {
      Tensor<T> out = in;
      for (std::size_t k = 1; k < inputs.size(); ++k) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += (*inputs[k])[i];
      }
      return out;
    }
    case LayerKind::eltwise_prod: {
      Tensor<T> out = in;
      for (std::size_t k = 1; k < inputs.size(); ++k) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] *= (*inputs[k])[i];
      }
      return out;
    }
    case LayerKind::flatten: {
      Tensor<T> out = in;
      out.reshape(out_shape);
      return out;
    }
  }
  mismatch(spec, "unknown layer kind");
}

template <typename T>
std::vector<Tensor<T>> layer_backward_into(const LayerSpec& spec, const ConstParams<T>& params,
                                           const Inputs<T>& inputs, const Tensor<T>& grad_out,
                                           const std::vector<Tensor<T>*>& param_grads, bool need_input_grads) {
  check_param_shapes(spec, params);
  if (param_grads.size() != params.size()) mismatch(spec, "gradient sink count differs from parameter count");
  const auto shapes = input_shapes(inputs);
  const Shape out_shape = infer_shape(spec, shapes);
  if (grad_out.shape() != out_shape) {
    mismatch(spec, "grad_out shape " + shape_string(grad_out.shape()) + " differs from output shape " +
                       shape_string(out_shape));
  }
  const Tensor<T>& in = *inputs.front();
  std::vector<Tensor<T>> grads;

  switch (spec.kind) {
    case LayerKind::conv2d: {
      const std::size_t ho = out_shape[1], wo = out_shape[2];
      const std::size_t patch = spec.in_channels * spec.kernel * spec.kernel;
      ConstMatrixMap<T> gy(grad_out.data().data(), spec.out_channels, ho * wo);
      if (param_grads[0] != nullptr || need_input_grads) {
        std::vector<T> col;
        if (param_grads[0] != nullptr) {
          im2col(spec, in, ho, wo, col);
          ConstMatrixMap<T> cm(col.data(), patch, ho * wo);
          MatrixMap<T> gw(param_grads[0]->data().data(), spec.out_channels, patch);
          gw.noalias() += gy * cm.transpose();
        }
        if (need_input_grads) {
          col.assign(patch * ho * wo, T{0});
          MatrixMap<T> gcol(col.data(), patch, ho * wo);
          ConstMatrixMap<T> wm(params[0]->value.data().data(), spec.out_channels, patch);
          gcol.noalias() = wm.transpose() * gy;
          Tensor<T> gin(in.shape());
          col2im(spec, col, ho, wo, gin);
          grads.push_back(std::move(gin));
        }
      }
      if (param_grads[1] != nullptr) {
        VectorMap<T> gb(param_grads[1]->data().data(), spec.out_channels);
        gb += gy.rowwise().sum();
      }
      return grads;
    }
    case LayerKind::relu: {
      if (need_input_grads) {
        Tensor<T> gin(in.shape());
        for (std::size_t i = 0; i < in.size(); ++i) gin[i] = in[i] > T{0} ? grad_out[i] : T{0};
        grads.push_back(std::move(gin));
      }
      return grads;
    }
    case LayerKind::maxpool2x2: {
      if (need_input_grads) {
        // Routes to the first maximal element in window order, matching forward.
        Tensor<T> gin(in.shape());
        for (std::size_t c = 0; c < out_shape[0]; ++c) {
          for (std::size_t y = 0; y < out_shape[1]; ++y) {
            for (std::size_t x = 0; x < out_shape[2]; ++x) {
              std::size_t by = 2 * y, bx = 2 * x;
              T best = in.at(c, by, bx);
              for (std::size_t dy = 0; dy < 2; ++dy) {
                for (std::size_t dx = 0; dx < 2; ++dx) {
                  const T v = in.at(c, 2 * y + dy, 2 * x + dx);
                  if (v > best) {
                    best = v;
                    by = 2 * y + dy;
                    bx = 2 * x + dx;
                  }
                }
              }
              gin.at(c, by, bx) += grad_out.at(c, y, x);
            }
          }
        }
        grads.push_back(std::move(gin));
      }
      return grads;
    }
    case LayerKind::fully_connected: {
      ConstVectorMap<T> gy(grad_out.data().data(), spec.out_units);
      ConstVectorMap<T> x(in.data().data(), spec.in_units);
      if (param_grads[0] != nullptr) {
        MatrixMap<T> gw(param_grads[0]->data().data(), spec.out_units, spec.in_units);
        gw.noalias() += gy * x.transpose();
      }
      if (param_grads[1] != nullptr) {
        VectorMap<T> gb(param_grads[1]->data().data(), spec.out_units);
        gb += gy;
      }
      if (need_input_grads) {
        Tensor<T> gin(in.shape());
        VectorMap<T> gx(gin.data().data(), spec.in_units);
        ConstMatrixMap<T> w(params[0]->value.data().data(), spec.out_units, spec.in_units);
        gx.noalias() = w.transpose() * gy;
        grads.push_back(std::move(gin));
      }
      return grads;
    }
    case LayerKind::concat_channels: {
      if (need_input_grads) {
        std::size_t offset = 0;
        for (const auto* t : inputs) {
          std::vector<T> part(grad_out.data().begin() + static_cast<std::ptrdiff_t>(offset),
                              grad_out.data().begin() + static_cast<std::ptrdiff_t>(offset + t->size()));
          grads.emplace_back(t->shape(), std::move(part));
          offset += t->size();
        }
      }
      return grads;
    }
    case LayerKind::eltwise_sum: {
      if (need_input_grads) grads.assign(inputs.size(), grad_out);
      return grads;
    }
    case LayerKind::eltwise_prod: {
      if (need_input_grads) {
        for (std::size_t k = 0; k < inputs.size(); ++k) {
          Tensor<T> g = grad_out;
          for (std::size_t j = 0; j < inputs.size(); ++j) {
            if (j == k) continue;
            for (std::size_t i = 0; i < g.size(); ++i) g[i] *= (*inputs[j])[i];
          }
          grads.push_back(std::move(g));
        }
      }
      return grads;
    }
    case LayerKind::flatten: {
      if (need_input_grads) {
        Tensor<T> g = grad_out;
        g.reshape(in.shape());
        grads.push_back(std::move(g));
      }
      return grads;
    }
  }
  mismatch(spec, "unknown layer kind");
}

template <typename T>
std::vector<Tensor<T>> layer_backward(const LayerSpec& spec, const std::vector<Parameter<T>*>& params,
                                      const Inputs<T>& inputs, const Tensor<T>& grad_out) {
  ConstParams<T> cparams(params.begin(), params.end());
  std::vector<Tensor<T>*> sinks;
  sinks.reserve(params.size());
  for (auto* p : params) sinks.push_back(p == nullptr ? nullptr : &p->grad);
  return layer_backward_into(spec, cparams, inputs, grad_out, sinks, true);
}

#define ILLUMKIT_INSTANTIATE(T)                                                                              \
  template Tensor<T> layer_forward<T>(const LayerSpec&, const ConstParams<T>&, const Inputs<T>&);          \
  template std::vector<Tensor<T>> layer_backward_into<T>(const LayerSpec&, const ConstParams<T>&,           \
                                                         const Inputs<T>&, const Tensor<T>&,                \
                                                         const std::vector<Tensor<T>*>&, bool);             \
  template std::vector<Tensor<T>> layer_backward<T>(const LayerSpec&, const std::vector<Parameter<T>*>&,    \
                                                    const Inputs<T>&, const Tensor<T>&);

ILLUMKIT_INSTANTIATE(float)
ILLUMKIT_INSTANTIATE(double)

#undef ILLUMKIT_INSTANTIATE

}  // namespace illumkit::nn
