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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "illumkit/io/synthetic.hpp"
#include "illumkit/sampling/sampling.hpp"
#include "illumkit/training/training.hpp"

namespace illumkit::cli {

/// One configurable value: `name` in INI section `section`, flag `--name`
/// with underscores written as dashes.
struct Key {
  std::string section;
  std::string name;
  std::string default_value;
  std::string help;

  std::string flag() const;
};

/// INI file values overlaid by command-line flags. Every key must belong to
/// the schema; values are parsed on access.
class RunConfig {
 public:
  explicit RunConfig(std::vector<Key> schema) : schema_(std::move(schema)) {}

  const std::vector<Key>& schema() const noexcept { return schema_; }

  /// Reads `path`; unknown sections or keys, and keys outside any section,
  /// raise ConfigError.
  void load_ini(const std::filesystem::path& path);
  /// Overrides a value (flags are applied after the file).
  void set(const std::string& name, const std::string& value);

  /// Explicitly configured value, if any.
  std::optional<std::string> value(const std::string& name) const;
  /// Configured value or the schema default.
  std::string get(const std::string& name) const;

  double real(const std::string& name) const;
  std::size_t count(const std::string& name) const;
  std::uint64_t u64(const std::string& name) const;
  bool boolean(const std::string& name) const;
  std::vector<double> reals(const std::string& name) const;
  std::vector<std::size_t> counts(const std::string& name) const;

 private:
  const Key& key(const std::string& name) const;

  std::vector<Key> schema_;
  std::map<std::string, std::string> values_;
};

std::vector<Key> synth_schema();
std::vector<Key> sampler_schema();
/// sgd, train, sampler and arch sections.
std::vector<Key> train_schema();

io::SyntheticSceneSpec synth_spec(const RunConfig& cfg);
sampling::SamplerConfig sampler_config(const RunConfig& cfg);
/// Starts from the profile named by `profile` (desk or paper) and applies
/// every explicitly configured key.
training::TrainConfig train_config(const RunConfig& cfg);

}  // namespace illumkit::cli
