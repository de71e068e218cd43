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
#include <memory>
#include <string>
#include <vector>

#include "illumkit/nn/layers.hpp"

namespace illumkit::nn {

inline constexpr char kContainerMagic[4] = {'I', 'L', 'L', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointEntry {
  std::string name;
  Shape shape;
  float lr_mult = 1.0f;
  std::vector<float> value;
  std::vector<float> momentum;

  friend bool operator==(const CheckpointEntry&, const CheckpointEntry&) = default;
};

/// Snapshot of named parameters plus optimizer position.
///
/// On disk: "ILLK", u32 version, section tag "checkpoint", stage id, u64 step,
/// architecture text, then a manifest of (name, shape, lr_mult) records and
/// finally the value and momentum payloads as little-endian float32 in
/// manifest order. Entries are kept sorted by name so that equal checkpoints
/// serialize to equal bytes.
struct Checkpoint {
  std::string stage_id;
  std::uint64_t step = 0;
  std::string arch;
  std::vector<CheckpointEntry> entries;

  const CheckpointEntry* find(const std::string& name) const;
  void sort_entries();

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace illumkit::nn
