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

#include "illumkit/nn/sgd.hpp"

#include <cmath>

namespace illumkit::nn {

void SgdHyper::validate() const {
  if (!(base_lr >= 0.0)) throw ConfigError("base_lr must be nonnegative");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be nonnegative");
  if (!(lr_decay_factor > 0.0)) throw ConfigError("lr_decay_factor must be positive");
  if (lr_decay_every == 0) throw ConfigError("lr_decay_every must be at least 1");
}

double scheduled_lr(const SgdHyper& hyper, std::uint64_t step) {
  const auto epochs = static_cast<double>(step / hyper.lr_decay_every);
  return hyper.base_lr * std::pow(hyper.lr_decay_factor, epochs);
}

template <typename T>
void sgd_update(const std::vector<std::shared_ptr<Parameter<T>>>& params, const SgdHyper& hyper,
                std::uint64_t step) {
  const double lr = scheduled_lr(hyper, step);
  const T mu = static_cast<T>(hyper.momentum);
  const T wd = static_cast<T>(hyper.weight_decay);
  for (const auto& p : params) {
    if (p->lr_mult == 0.0) continue;
    if (p->grad.shape() != p->value.shape() || p->momentum.shape() != p->value.shape()) {
      throw ShapeError("sgd_update: gradient or momentum shape differs from value shape");
    }
    const T eta = static_cast<T>(lr * p->lr_mult);
    auto& v = p->momentum;
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      v[i] = mu * v[i] - eta * (p->grad[i] + wd * p->value[i]);
      p->value[i] += v[i];
    }
  }
}

template void sgd_update<float>(const std::vector<std::shared_ptr<Parameter<float>>>&, const SgdHyper&,
                                std::uint64_t);
template void sgd_update<double>(const std::vector<std::shared_ptr<Parameter<double>>>&, const SgdHyper&,
                                 std::uint64_t);

}  // namespace illumkit::nn
