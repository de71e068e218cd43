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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "illumkit/color/color.hpp"

namespace illumkit::io {

inline constexpr int kManifestVersion = 1;

struct ManifestRecord {
  /// Paths as written in the manifest; relative ones resolve against the
  /// manifest's directory.
  std::string image;
  std::optional<std::string> mask;
  color::Illuminant gt;
  std::string subset;
  /// P6 samples are already linear (skip the inverse gamma).
  bool linear = false;
};

/// CSV with header `image,mask,r,g,b,subset` and an optional trailing
/// `linear` column (0/1). Lines starting with '#' are comments; a leading
/// `# version N` comment declares the format version.
struct DatasetManifest {
  int version = kManifestVersion;
  std::filesystem::path base_dir;
  std::vector<ManifestRecord> records;

  std::filesystem::path resolve(const std::string& p) const;
  /// Distinct subset tags in first-appearance order.
  std::vector<std::string> subsets() const;
};

/// Validates every record (paths exist, ground truth finite, nonnegative and
/// nonzero) and normalizes the ground truths. All record problems are
/// collected into one DataError, each tagged with its record index.
DatasetManifest load_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

/// Decodes record i and attaches its mask.
color::LinearImage load_record_image(const DatasetManifest& manifest, std::size_t i);

}  // namespace illumkit::io
