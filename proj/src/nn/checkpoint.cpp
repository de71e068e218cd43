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

#include "illumkit/nn/checkpoint.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include "illumkit/common/binary_io.hpp"

namespace illumkit {

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace illumkit

namespace illumkit::nn {

const CheckpointEntry* Checkpoint::find(const std::string& name) const {
  auto it = std::find_if(entries.begin(), entries.end(), [&](const auto& e) { return e.name == name; });
  return it == entries.end() ? nullptr : &*it;
}

void Checkpoint::sort_entries() {
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
}

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt) {
  ByteWriter w;
  w.raw(std::string_view(kContainerMagic, 4));
  w.u32(kCheckpointVersion);
  w.str("checkpoint");
  w.str(ckpt.stage_id);
  w.u64(ckpt.step);
  w.str(ckpt.arch);
  w.u32(static_cast<std::uint32_t>(ckpt.entries.size()));
  for (const auto& e : ckpt.entries) {
    if (e.value.size() != shape_size(e.shape) || e.momentum.size() != e.value.size()) {
      throw ShapeError("checkpoint entry '" + e.name + "' payload does not match its shape");
    }
    w.str(e.name);
    w.u32(static_cast<std::uint32_t>(e.shape.size()));
    for (auto d : e.shape) w.u32(static_cast<std::uint32_t>(d));
    w.f32(e.lr_mult);
  }
  for (const auto& e : ckpt.entries) {
    w.f32s(e.value);
    w.f32s(e.momentum);
  }
  return w.bytes();
}

Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "checkpoint");
  if (r.raw(4) != std::string_view(kContainerMagic, 4)) throw DataError("checkpoint: bad magic");
  const auto version = r.u32();
  if (version != kCheckpointVersion) throw DataError("checkpoint: unsupported version " + std::to_string(version));
  const auto section = r.str();
  if (section != "checkpoint") throw DataError("checkpoint: unexpected section '" + section + "'");
  Checkpoint ckpt;
  ckpt.stage_id = r.str();
  ckpt.step = r.u64();
  ckpt.arch = r.str();
  const auto count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    CheckpointEntry e;
    e.name = r.str();
    const auto rank = r.u32();
    if (rank > 8) throw DataError("checkpoint: implausible rank for '" + e.name + "'");
    for (std::uint32_t k = 0; k < rank; ++k) e.shape.push_back(r.u32());
    e.lr_mult = r.f32();
    ckpt.entries.push_back(std::move(e));
  }
  for (auto& e : ckpt.entries) {
    e.value = r.f32s(shape_size(e.shape));
    e.momentum = r.f32s(shape_size(e.shape));
  }
  if (r.remaining() != 0) throw DataError("checkpoint: trailing bytes");
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  write_file_bytes(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return deserialize_checkpoint(bytes);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace illumkit::nn
