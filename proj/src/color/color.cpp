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

#include "illumkit/color/color.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace illumkit::color {

namespace {
constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr double kInvSqrt3 = 1.0 / std::numbers::sqrt3;

double norm(const Rgb& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }
}  // namespace

Illuminant normalize_illuminant(const Rgb& v) {
  for (double c : v) {
    if (!std::isfinite(c)) throw NumericError("illuminant has a non-finite channel");
    if (c < 0.0) throw DegenerateIlluminantError("illuminant has a negative channel");
  }
  const double n = norm(v);
  if (n < 1e-12) throw DegenerateIlluminantError("illuminant norm below 1e-12");
  return Illuminant{{v[0] / n, v[1] / n, v[2] / n}};
}

Illuminant neutral_illuminant() { return Illuminant{{kInvSqrt3, kInvSqrt3, kInvSqrt3}}; }

double angular_error(const Rgb& a, const Rgb& b) {
  const double na = norm(a), nb = norm(b);
  if (!(na > 0.0) || !(nb > 0.0)) throw DegenerateIlluminantError("angular_error of a zero vector");
  // Unit vectors first so the cross product does not underflow or overflow.
  const Rgb u{a[0] / na, a[1] / na, a[2] / na};
  const Rgb v{b[0] / nb, b[1] / nb, b[2] / nb};
  const Rgb cross{u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
  const double dot = std::clamp(u[0] * v[0] + u[1] * v[1] + u[2] * v[2], -1.0, 1.0);
  return std::atan2(norm(cross), dot) * kRadToDeg;
}

Rgb correction_gains(const Illuminant& e) {
  Rgb g{};
  for (int c = 0; c < 3; ++c) {
    if (!(e.rgb[c] > kMinChannel)) {
      throw DegenerateIlluminantError("illuminant channel " + std::to_string(c) + " is too small to correct");
    }
    g[c] = kInvSqrt3 / e.rgb[c];
  }
  return g;
}

Rgb rendering_gains(const Illuminant& e) {
  Rgb g{};
  for (int c = 0; c < 3; ++c) {
    if (!(e.rgb[c] > kMinChannel)) {
      throw DegenerateIlluminantError("illuminant channel " + std::to_string(c) + " is too small to render");
    }
    g[c] = std::numbers::sqrt3 * e.rgb[c];
  }
  return g;
}

LinearImage::LinearImage(std::size_t width, std::size_t height, float fill)
    : width_(width), height_(height), pixels_(width * height * 3, fill) {}

void LinearImage::set_mask(std::vector<std::uint8_t> mask) {
  if (mask.size() != pixel_count()) throw DataError("mask dimensions do not match the image");
  mask_ = std::move(mask);
}

std::size_t LinearImage::valid_count() const noexcept {
  if (mask_.empty()) return pixel_count();
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{0}));
}

void LinearImage::validate() const {
  for (std::size_t i = 0; i < pixels_.size(); ++i) {
    if (!std::isfinite(pixels_[i]) || pixels_[i] < 0.0f) {
      throw DataError("pixel value at index " + std::to_string(i) + " is negative or non-finite");
    }
  }
}

namespace {
LinearImage scale_channels(const LinearImage& image, const Rgb& gains) {
  LinearImage out = image;
  auto px = out.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    px[i] = static_cast<float>(static_cast<double>(px[i]) * gains[i % 3]);
  }
  return out;
}
}  // namespace

LinearImage diagonal_correct(const Illuminant& e, const LinearImage& image) {
  return scale_channels(image, correction_gains(e));
}

template <typename T>
nn::Tensor<T> diagonal_correct(const Illuminant& e, const nn::Tensor<T>& patch) {
  if (patch.rank() != 3 || patch.dim(0) != 3) {
    throw ShapeError("diagonal_correct expects a 3 x H x W patch, got " + nn::shape_string(patch.shape()));
  }
  const Rgb g = correction_gains(e);
  nn::Tensor<T> out = patch;
  const std::size_t plane = patch.dim(1) * patch.dim(2);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < plane; ++i) {
      out[c * plane + i] = static_cast<T>(static_cast<double>(patch[c * plane + i]) * g[c]);
    }
  }
  return out;
}

template nn::Tensor<float> diagonal_correct<float>(const Illuminant&, const nn::Tensor<float>&);
template nn::Tensor<double> diagonal_correct<double>(const Illuminant&, const nn::Tensor<double>&);

LinearImage render_under_illuminant(const LinearImage& canonical, const Illuminant& e) {
  return scale_channels(canonical, rendering_gains(e));
}

double gamma_encode(double v) { return std::pow(std::clamp(v, 0.0, 1.0), 1.0 / kGamma); }

double gamma_decode(double v) { return std::pow(std::clamp(v, 0.0, 1.0), kGamma); }

LinearImage gamma_encode(const LinearImage& image) {
  LinearImage out = image;
  for (auto& v : out.pixels()) v = static_cast<float>(gamma_encode(static_cast<double>(v)));
  return out;
}

}  // namespace illumkit::color
