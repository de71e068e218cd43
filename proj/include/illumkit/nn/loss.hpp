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

#include "illumkit/nn/tensor.hpp"

namespace illumkit::nn {

template <typename T>
struct LossResult {
  double loss = 0.0;
  Tensor<T> grad;
};

/// Mean squared Euclidean distance between N x 3 estimates and targets:
/// (1/N) sum_i ||est_i - gt_i||^2, with gradient (2/N)(est - gt).
template <typename T>
LossResult<T> euclidean_loss(const Tensor<T>& est, const Tensor<T>& gt);

}  // namespace illumkit::nn
