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

#include "illumkit/io/patch_export.hpp"

#include <fstream>

#include "illumkit/common/binary_io.hpp"
#include "illumkit/nn/checkpoint.hpp"

namespace illumkit::io {

namespace {
constexpr std::string_view kSection = "patches";
}

std::vector<std::uint8_t> serialize_patches(std::span<const ExportedPatch> patches, std::size_t patch_size) {
  const nn::Shape shape{3, patch_size, patch_size};
  ByteWriter out;
  out.raw(std::string_view(nn::kContainerMagic, 4));
  out.u32(nn::kCheckpointVersion);
  out.str(kSection);
  out.u32(static_cast<std::uint32_t>(patch_size));
  out.u32(static_cast<std::uint32_t>(patches.size()));
  for (const auto& p : patches) {
    if (p.pair.central.shape() != shape || p.pair.surround.shape() != shape) {
      throw ShapeError("patch tensors must be 3 x S x S with S = " + std::to_string(patch_size));
    }
    out.u64(p.image_id);
    out.u32(static_cast<std::uint32_t>(p.pair.center_x));
    out.u32(static_cast<std::uint32_t>(p.pair.center_y));
    out.f32(static_cast<float>(p.pair.d_used));
    out.u8(p.pair.mode == sampling::SamplingMode::bright_dark ? 0 : 1);
    out.f32s(p.pair.central.data());
    out.f32s(p.pair.surround.data());
  }
  return out.bytes();
}

std::vector<ExportedPatch> deserialize_patches(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes, "patch file");
  if (in.raw(4) != std::string_view(nn::kContainerMagic, 4)) throw DataError("patch file: bad magic");
  if (const auto v = in.u32(); v != nn::kCheckpointVersion) {
    throw DataError("patch file: unsupported version " + std::to_string(v));
  }
  if (in.str() != kSection) throw DataError("patch file: not a patches section");
  const std::size_t s = in.u32();
  const std::size_t count = in.u32();
  const nn::Shape shape{3, s, s};
  std::vector<ExportedPatch> out;
  for (std::size_t i = 0; i < count; ++i) {
    ExportedPatch p;
    p.image_id = in.u64();
    p.pair.center_x = in.u32();
    p.pair.center_y = in.u32();
    p.pair.d_used = in.f32();
    const auto mode = in.u8();
    if (mode > 1) throw DataError("patch file: bad sampling mode");
    p.pair.mode = mode == 0 ? sampling::SamplingMode::bright_dark : sampling::SamplingMode::random;
    p.pair.central = nn::Tensor<float>(shape, in.f32s(3 * s * s));
    p.pair.surround = nn::Tensor<float>(shape, in.f32s(3 * s * s));
    out.push_back(std::move(p));
  }
  if (in.remaining() != 0) throw DataError("patch file: trailing bytes");
  return out;
}

void write_patches(const std::filesystem::path& tensor_path, const std::filesystem::path& csv_path,
                   std::span<const ExportedPatch> patches, std::size_t patch_size) {
  write_file_bytes(tensor_path, serialize_patches(patches, patch_size));
  if (csv_path.has_parent_path()) std::filesystem::create_directories(csv_path.parent_path());
  std::ofstream csv(csv_path, std::ios::trunc);
  if (!csv) throw DataError("cannot write " + csv_path.string());
  csv << "image_id,center_x,center_y,d_used,mode\n";
  for (const auto& p : patches) {
    csv << p.image_id << "," << p.pair.center_x << "," << p.pair.center_y << "," << p.pair.d_used << ","
        << sampling::to_string(p.pair.mode) << "\n";
  }
  if (!csv) throw DataError("write failed for " + csv_path.string());
}

}  // namespace illumkit::io
