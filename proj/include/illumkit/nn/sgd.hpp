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
#include <memory>
#include <vector>

#include "illumkit/nn/layers.hpp"

namespace illumkit::nn {

struct SgdHyper {
  double base_lr = 0.001;
  double momentum = 0.9;
  double weight_decay = 0.0005;
  double lr_decay_factor = 0.1;
  std::uint64_t lr_decay_every = 50000;

  /// Throws ConfigError unless 0 <= momentum < 1, base_lr >= 0 (0 gives null training), weight_decay >= 0.
  void validate() const;
};

/// Step-decayed learning rate before the per-parameter multiplier.
double scheduled_lr(const SgdHyper& hyper, std::uint64_t step);

/// One momentum SGD step on every parameter:
///   v <- momentum * v - lr * lr_mult * (grad + weight_decay * value);  value <- value + v
/// Parameters with lr_mult == 0 are left untouched, momentum buffer included.
template <typename T>
void sgd_update(const std::vector<std::shared_ptr<Parameter<T>>>& params, const SgdHyper& hyper,
                std::uint64_t step);

}  // namespace illumkit::nn
