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
#include <cstdint>
#include <string_view>
#include <vector>

#include "illumkit/color/color.hpp"
#include "illumkit/nn/tensor.hpp"

namespace illumkit::sampling {

enum class SamplingMode { bright_dark, random };

std::string_view to_string(SamplingMode mode);
SamplingMode parse_sampling_mode(std::string_view text);

/// Scalar projections of every pixel onto the image mean color, plus the
/// bright/dark selection for one percentage d.
struct PixelRanking {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t valid_count = 0;
  /// (p . mu) / ||mu||; masked pixels hold -infinity.
  std::vector<double> projections;
  std::vector<std::uint8_t> bright;
  std::vector<std::uint8_t> dark;
  /// Pixels per set for the last selection.
  std::size_t k = 0;
};

/// Projections only. Throws DataError for a fully masked or black image.
PixelRanking rank_projections(const color::LinearImage& image);

/// Marks the k = ceil(d/100 * N_valid) largest projections as bright and the
/// k smallest as dark, ties broken by row-major pixel index. Requires 0 < d < 50.
void select_bright_dark(PixelRanking& ranking, double d_percent);

struct SamplerConfig {
  std::size_t patch_size = 32;
  std::size_t num_patches = 15;
  std::vector<double> d_schedule{3.5, 5.0, 10.0};
  /// 0 selects the default of 10 * num_patches.
  std::size_t max_attempts_per_d = 0;
  SamplingMode mode = SamplingMode::bright_dark;
  std::uint64_t seed = 0;
  /// Extract network inputs from the gamma-encoded image; ranking always uses linear pixels.
  bool gamma_inputs = true;

  void validate() const;
  std::size_t attempts_per_d() const noexcept { return max_attempts_per_d ? max_attempts_per_d : 10 * num_patches; }
};

/// A central S x S window and its 2S x 2S neighbourhood resized to S x S.
/// Both tensors are 3 x S x S. The central window spans
/// [center - S/2, center - S/2 + S) on each axis.
struct PatchPair {
  nn::Tensor<float> central;
  nn::Tensor<float> surround;
  std::size_t center_x = 0;
  std::size_t center_y = 0;
  /// Percentage in effect when the window was accepted; 0 for random windows.
  double d_used = 0.0;
  SamplingMode mode = SamplingMode::bright_dark;
};

struct SampleResult {
  std::vector<PatchPair> pairs;
  /// Set when the d schedule ran out and random windows filled the remainder.
  bool fell_back_to_random = false;
};

/// Deterministic for a given (image, cfg). Throws DataError if the image is
/// smaller than S or no unmasked window can be found.
SampleResult sample_patch_pairs(const color::LinearImage& image, const SamplerConfig& cfg);

/// The S x S window centred at (cx, cy); must lie inside the image.
nn::Tensor<float> extract_central(const color::LinearImage& image, std::size_t cx, std::size_t cy, std::size_t s);

/// 2S x 2S window centred at (cx, cy), out-of-bounds rows/columns replicated
/// from the edge, masked pixels read as 0, reduced to S x S by 2x2 box means.
nn::Tensor<float> extract_surround(const color::LinearImage& image, std::size_t cx, std::size_t cy, std::size_t s);

}  // namespace illumkit::sampling
