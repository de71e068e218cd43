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
#include <random>
#include <string>

#include "illumkit/color/color.hpp"
#include "illumkit/nn/layers.hpp"
#include "illumkit/nn/sequential.hpp"

namespace illumkit::test {

template <typename T>
nn::Tensor<T> random_tensor(const nn::Shape& shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  nn::Tensor<T> t(shape);
  for (auto& v : t.data()) v = static_cast<T>(u(rng));
  return t;
}

template <typename T>
std::vector<nn::ParamPtr<T>> random_params(const nn::LayerSpec& spec, std::mt19937_64& rng, double scale = 0.5) {
  std::vector<nn::ParamPtr<T>> out;
  for (const auto& s : spec.parameter_shapes()) {
    out.push_back(std::make_shared<nn::Parameter<T>>(random_tensor<T>(s, rng, -scale, scale)));
  }
  return out;
}

inline color::LinearImage random_image(std::size_t w, std::size_t h, std::mt19937_64& rng, double lo = 0.0,
                                       double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  color::LinearImage img(w, h);
  for (auto& v : img.pixels()) v = static_cast<float>(u(rng));
  return img;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("illumkit_" + tag + "_" + std::to_string(rd()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace illumkit::test
