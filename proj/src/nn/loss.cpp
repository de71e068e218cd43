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

#include "illumkit/nn/loss.hpp"

namespace illumkit::nn {

template <typename T>
LossResult<T> euclidean_loss(const Tensor<T>& est, const Tensor<T>& gt) {
  if (est.rank() != 2 || est.dim(1) != 3) {
    throw ShapeError("euclidean_loss: estimates must be N x 3, got " + shape_string(est.shape()));
  }
  if (est.shape() != gt.shape()) {
    throw ShapeError("euclidean_loss: target shape " + shape_string(gt.shape()) + " differs from " +
                     shape_string(est.shape()));
  }
  const std::size_t n = est.dim(0);
  if (n == 0) throw ShapeError("euclidean_loss: empty batch");

  LossResult<T> out{0.0, Tensor<T>(est.shape())};
  const double scale = 2.0 / static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    const double d = static_cast<double>(est[i]) - static_cast<double>(gt[i]);
    sum += d * d;
    out.grad[i] = static_cast<T>(scale * d);
  }
  out.loss = sum / static_cast<double>(n);
  return out;
}

template LossResult<float> euclidean_loss<float>(const Tensor<float>&, const Tensor<float>&);
template LossResult<double> euclidean_loss<double>(const Tensor<double>&, const Tensor<double>&);

}  // namespace illumkit::nn
