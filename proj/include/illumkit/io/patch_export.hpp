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
#include <span>
#include <vector>

#include "illumkit/sampling/sampling.hpp"

namespace illumkit::io {

/// A sampled pair tagged with the manifest record it came from.
struct ExportedPatch {
  std::size_t image_id = 0;
  sampling::PatchPair pair;
};

/// ILLK container, section "patches": u32 patch size S, u32 count, then per
/// patch u64 image id, u32 center x, u32 center y, f32 d_used, u8 mode
/// (0 bright_dark, 1 random), 3*S*S central floats, 3*S*S surround floats.
std::vector<std::uint8_t> serialize_patches(std::span<const ExportedPatch> patches, std::size_t patch_size);
std::vector<ExportedPatch> deserialize_patches(std::span<const std::uint8_t> bytes);

/// Writes the tensor container and its CSV index
/// (image_id,center_x,center_y,d_used,mode).
void write_patches(const std::filesystem::path& tensor_path, const std::filesystem::path& csv_path,
                   std::span<const ExportedPatch> patches, std::size_t patch_size);

}  // namespace illumkit::io
