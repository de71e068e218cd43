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

#include <string_view>

#include "illumkit/color/color.hpp"

namespace illumkit::baselines {

enum class Method { gray_world, white_patch, shades_of_gray, gray_edge };

std::string_view to_string(Method m);
Method parse_method(std::string_view text);

struct BaselineSpec {
  Method method = Method::gray_world;
  double minkowski_p = 6.0;
  /// 1 or 2; gray_edge only.
  int derivative_order = 1;
  /// Gaussian pre-smoothing in pixels (truncated at 3 sigma); 0 disables it.
  /// Used by gray_edge and shades_of_gray.
  double smoothing_sigma = 0.0;

  /// Common defaults: p = 6 for shades_of_gray and gray_edge, sigma = 1 for gray_edge.
  static BaselineSpec defaults(Method m);
  void validate() const;
};

/// Masked pixels are ignored by every statistic, including smoothing and
/// derivative stencils. Throws DegenerateIlluminantError when the statistic
/// vanishes (e.g. gray_edge on a constant image).
color::Illuminant estimate_baseline(const BaselineSpec& spec, const color::LinearImage& image);

}  // namespace illumkit::baselines
