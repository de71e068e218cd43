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
#include <string>
#include <vector>

#include "illumkit/nn/sequential.hpp"

namespace illumkit::nn {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  /// Coordinates whose +/-eps probes crossed a ReLU or max-pool switch point,
  /// where the function is not differentiable and central differences are
  /// meaningless.
  std::size_t skipped = 0;
  std::string worst;
};

/// |a - n| / max(|a|, |n|, floor). The floor keeps coordinates whose true
/// gradient is (near) zero from turning rounding noise into large ratios.
double relative_error(double analytic, double numeric, double floor = 1e-2);

struct FdEvaluation {
  double loss = 0.0;
  std::vector<std::uint8_t> routing;
};

struct FdVariable {
  std::string name;
  Tensor<double>* value = nullptr;
  const Tensor<double>* analytic = nullptr;
};

/// Compares analytic gradients against central differences
/// (f(x+eps) - f(x-eps)) / (2 eps) for every coordinate of every variable.
/// `evaluate` recomputes the scalar loss at the current variable values.
GradCheckResult finite_difference_check(const std::vector<FdVariable>& variables,
                                        const std::function<FdEvaluation()>& evaluate, double eps);

/// Checks every parameter and input gradient of `net` through a squared-error
/// head against a seeded random target. Requires eps in [1e-7, 1e-3].
GradCheckResult grad_check(const Sequential<double>& net, const Tensor<double>& input, double eps,
                           std::uint64_t target_seed = 0);

}  // namespace illumkit::nn
