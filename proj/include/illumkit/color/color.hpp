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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "illumkit/nn/tensor.hpp"

namespace illumkit::color {

using Rgb = std::array<double, 3>;

/// Smallest normalized channel a diagonal transform accepts.
inline constexpr double kMinChannel = 1e-6;

/// Unit-L2 direction of the scene light.
struct Illuminant {
  Rgb rgb{};

  friend bool operator==(const Illuminant&, const Illuminant&) = default;
};

/// v / ||v||. Throws DegenerateIlluminantError for ||v|| < 1e-12 or negative
/// channels, NumericError for non-finite input.
Illuminant normalize_illuminant(const Rgb& v);
Illuminant neutral_illuminant();

/// Angle between two nonzero vectors in degrees. Evaluated as
/// atan2(|a x b|, a . b), which equals arccos of the normalized dot product
/// but keeps full precision near 0 and 180 degrees.
double angular_error(const Rgb& e, const Rgb& e_star);

/// Per-channel factors (1/sqrt(3)) / e_c that map a patch lit by `e` to the
/// neutral light. The neutral illuminant gives unit gains.
Rgb correction_gains(const Illuminant& e);
/// Per-channel factors sqrt(3) * e_c, the exact inverse of correction_gains.
Rgb rendering_gains(const Illuminant& e);

/// H x W x 3 scene-linear raster with an optional exclusion mask
/// (nonzero = excluded).
class LinearImage {
 public:
  LinearImage() = default;
  LinearImage(std::size_t width, std::size_t height, float fill = 0.0f);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return width_ * height_; }

  float& at(std::size_t x, std::size_t y, std::size_t c) noexcept { return pixels_[(y * width_ + x) * 3 + c]; }
  float at(std::size_t x, std::size_t y, std::size_t c) const noexcept { return pixels_[(y * width_ + x) * 3 + c]; }
  std::span<float> pixels() noexcept { return pixels_; }
  std::span<const float> pixels() const noexcept { return pixels_; }

  bool has_mask() const noexcept { return !mask_.empty(); }
  bool masked(std::size_t x, std::size_t y) const noexcept { return !mask_.empty() && mask_[y * width_ + x] != 0; }
  const std::vector<std::uint8_t>& mask() const noexcept { return mask_; }
  void set_mask(std::vector<std::uint8_t> mask);
  void clear_mask() { mask_.clear(); }
  std::size_t valid_count() const noexcept;

  /// Throws DataError on negative or non-finite pixels.
  void validate() const;

  friend bool operator==(const LinearImage&, const LinearImage&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<float> pixels_;
  std::vector<std::uint8_t> mask_;
};

/// Von Kries correction: out_c = in_c * (1/sqrt(3)) / e_c. Values are not clamped.
LinearImage diagonal_correct(const Illuminant& e, const LinearImage& image);
template <typename T>
nn::Tensor<T> diagonal_correct(const Illuminant& e, const nn::Tensor<T>& patch);

/// out_c = in_c * sqrt(3) * e_c; the inverse of diagonal_correct.
LinearImage render_under_illuminant(const LinearImage& canonical, const Illuminant& e);

inline constexpr double kGamma = 2.2;

/// clip(v, 0, 1)^(1/2.2)
double gamma_encode(double v);
/// v^2.2 for v in [0, 1]
double gamma_decode(double v);
LinearImage gamma_encode(const LinearImage& image);

}  // namespace illumkit::color
