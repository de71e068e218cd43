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
#include <span>
#include <vector>

#include "illumkit/color/color.hpp"

namespace illumkit::io {

/// PFM ("PF", 3 channels, 32-bit float). Decoding accepts either byte order;
/// encoding writes little-endian (negative scale) with rows bottom to top.
color::LinearImage decode_pfm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_pfm(const color::LinearImage& image);

/// Binary PPM (P6) with maxval up to 65535. Values are read as gamma-encoded
/// and linearized with the 2.2 power law unless `linear` is set.
color::LinearImage decode_ppm(std::span<const std::uint8_t> bytes, bool linear = false);
/// Writes the pixel values as they are (clipped to [0, 1]); gamma-encode first
/// for display output.
std::vector<std::uint8_t> encode_ppm(const color::LinearImage& image, std::uint32_t maxval = 255);

/// PBM (P1/P4) or PGM (P2/P5) exclusion mask; nonzero samples (black in PBM)
/// mark excluded pixels. Returns one byte per pixel, 1 = excluded.
std::vector<std::uint8_t> decode_mask(std::span<const std::uint8_t> bytes, std::size_t& width, std::size_t& height);
/// Binary PGM with 255 for excluded pixels.
std::vector<std::uint8_t> encode_mask(std::span<const std::uint8_t> mask, std::size_t width, std::size_t height);

/// Dispatches on the magic number (PF or P6).
color::LinearImage decode_image(const std::filesystem::path& path, bool linear = false);
void write_pfm(const std::filesystem::path& path, const color::LinearImage& image);
void write_ppm(const std::filesystem::path& path, const color::LinearImage& image, std::uint32_t maxval = 255);

/// Reads a mask file and checks it against the image size.
std::vector<std::uint8_t> read_mask(const std::filesystem::path& path, std::size_t width, std::size_t height);
void write_mask(const std::filesystem::path& path, std::span<const std::uint8_t> mask, std::size_t width,
                std::size_t height);

}  // namespace illumkit::io
