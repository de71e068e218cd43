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
#include <filesystem>

#include "illumkit/color/color.hpp"
#include "illumkit/io/manifest.hpp"

namespace illumkit::io {

/// Piecewise-constant reflectance mosaics (Voronoi regions) rendered under a
/// random light.
struct SyntheticSceneSpec {
  std::size_t width = 128;
  std::size_t height = 128;
  std::size_t num_regions = 150;
  /// Per-channel reflectance bounds.
  double reflectance_min = 0.02;
  double reflectance_max = 0.55;
  /// Share of regions that are achromatic (equal channels).
  double achromatic_fraction = 0.35;
  /// Largest relative channel deviation of chromatic regions.
  double max_saturation = 0.6;
  /// Illuminant components are drawn uniformly from this range, then normalized.
  double illuminant_min = 0.2;
  double illuminant_max = 1.0;
  double noise_std = 0.0;
  /// Share of scenes whose canonical channel means are equalized over the
  /// unmasked pixels (subset "balanced"; the rest are "free").
  double balanced_fraction = 0.0;
  /// Adds a masked colour chart to every scene.
  bool chart = false;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticScene {
  color::LinearImage canonical;
  /// Rendered under `e`, noise added; carries the chart mask when enabled.
  color::LinearImage image;
  color::Illuminant e;
  bool balanced = false;
};

/// Scene `index` of the dataset defined by `spec`; fully determined by (spec, index).
SyntheticScene generate_scene(const SyntheticSceneSpec& spec, std::size_t index);

/// Whether scene `index` of an n-scene dataset is balanced (evenly spread).
bool scene_is_balanced(const SyntheticSceneSpec& spec, std::size_t index);

/// Writes scene_NNNN.pfm (plus scene_NNNN_mask.pgm with a chart) and
/// manifest.csv into `out_dir`; returns the manifest as written.
DatasetManifest generate_synthetic(const SyntheticSceneSpec& spec, std::size_t n,
                                   const std::filesystem::path& out_dir);

}  // namespace illumkit::io
