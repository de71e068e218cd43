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
#include <string>
#include <string_view>
#include <vector>

namespace illumkit::nets {

/// Ways of combining the central patch with its surround.
enum class Variant {
  central_only,    // one stream on the central patch
  two_channel,     // central and surround stacked channel-wise into one stream
  siamese,         // two streams with shared weights, features concatenated
  pseudo_siamese,  // two unshared streams, features concatenated
  contextual,      // two unshared streams, features summed
};

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view text);

struct ArchConfig {
  Variant variant = Variant::contextual;
  /// Output channels of each conv block; every block ends in a 2x2 max-pool.
  std::vector<std::size_t> backbone{16, 32, 64};
  std::size_t convs_per_block = 1;
  std::size_t kernel = 3;
  /// Fully connected widths of every decision head; the last must be 3.
  std::vector<std::size_t> head{128, 64, 3};
  std::size_t input_size = 32;
  /// Include the refinement network.
  bool refinement = false;
  /// Include the per-stream 3-unit heads used while pretraining each stream.
  bool stream_heads = false;

  void validate() const;
  /// Spatial extent of the last feature map.
  std::size_t feature_extent() const;
  /// Flattened size of one stream's last feature map.
  std::size_t feature_size() const;

  /// One-line key=value form stored in checkpoints.
  std::string serialize() const;
  static ArchConfig parse(std::string_view text);

  friend bool operator==(const ArchConfig&, const ArchConfig&) = default;
};

}  // namespace illumkit::nets
