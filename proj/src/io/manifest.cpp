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

#include "illumkit/io/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "illumkit/io/image_io.hpp"

namespace illumkit::io {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_real(const std::string& s, const char* what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw DataError(std::string("bad ") + what + " value '" + s + "'");
  }
  if (used != s.size()) throw DataError(std::string("bad ") + what + " value '" + s + "'");
  return v;
}

}  // namespace

std::filesystem::path DatasetManifest::resolve(const std::string& p) const {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

std::vector<std::string> DatasetManifest::subsets() const {
  std::vector<std::string> out;
  for (const auto& r : records) {
    if (std::find(out.begin(), out.end(), r.subset) == out.end()) out.push_back(r.subset);
  }
  return out;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  DatasetManifest m;
  m.base_dir = path.parent_path();
  std::string line;
  bool header_seen = false;
  bool has_linear = false;
  std::size_t line_no = 0;
  std::vector<std::string> problems;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (line[0] == '#') {
      std::istringstream c(line.substr(1));
      std::string key;
      int v = 0;
      if (!header_seen && c >> key >> v && key == "version") {
        if (v != kManifestVersion) throw DataError(path.string() + ": unsupported manifest version " + std::to_string(v));
        m.version = v;
      }
      continue;
    }
    const auto fields = split_csv(line);
    if (!header_seen) {
      const std::vector<std::string> expected{"image", "mask", "r", "g", "b", "subset"};
      auto with_linear = expected;
      with_linear.push_back("linear");
      if (fields == with_linear) {
        has_linear = true;
      } else if (fields != expected) {
        throw DataError(path.string() + ": header must be image,mask,r,g,b,subset[,linear]");
      }
      header_seen = true;
      continue;
    }
    const std::size_t index = m.records.size() + problems.size();
    try {
      const std::size_t want = has_linear ? 7 : 6;
      if (fields.size() != want && !(has_linear && fields.size() == 6)) {
        throw DataError("expected " + std::to_string(want) + " fields, got " + std::to_string(fields.size()));
      }
      ManifestRecord r;
      r.image = fields[0];
      if (r.image.empty()) throw DataError("empty image path");
      if (!fields[1].empty()) r.mask = fields[1];
      const color::Rgb gt{parse_real(fields[2], "r"), parse_real(fields[3], "g"), parse_real(fields[4], "b")};
      for (double v : gt) {
        if (!std::isfinite(v)) throw DataError("non-finite ground truth");
        if (v < 0.0) throw DataError("negative ground-truth channel");
      }
      try {
        r.gt = color::normalize_illuminant(gt);
      } catch (const Error&) {
        throw DataError("degenerate ground truth");
      }
      r.subset = fields[5];
      if (fields.size() == 7 && !fields[6].empty()) {
        if (fields[6] != "0" && fields[6] != "1") throw DataError("linear must be 0 or 1");
        r.linear = fields[6] == "1";
      }
      if (!std::filesystem::exists(m.resolve(r.image))) throw DataError("image not found: " + r.image);
      if (r.mask && !std::filesystem::exists(m.resolve(*r.mask))) throw DataError("mask not found: " + *r.mask);
      m.records.push_back(std::move(r));
    } catch (const DataError& e) {
      problems.push_back("record " + std::to_string(index) + " (line " + std::to_string(line_no) + "): " + e.what());
    }
  }
  if (!header_seen) throw DataError(path.string() + ": missing header");
  if (!problems.empty()) {
    std::string msg = path.string() + ": " + std::to_string(problems.size()) + " invalid record(s)";
    for (const auto& p : problems) msg += "\n  " + p;
    throw DataError(msg);
  }
  return m;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const bool any_linear =
      std::any_of(manifest.records.begin(), manifest.records.end(), [](const auto& r) { return r.linear; });
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "image,mask,r,g,b,subset" << (any_linear ? ",linear" : "") << "\n";
  out.precision(17);
  for (const auto& r : manifest.records) {
    out << r.image << "," << r.mask.value_or("") << "," << r.gt.rgb[0] << "," << r.gt.rgb[1] << "," << r.gt.rgb[2]
        << "," << r.subset;
    if (any_linear) out << "," << (r.linear ? 1 : 0);
    out << "\n";
  }
  if (!out) throw DataError("write failed for " + path.string());
}

color::LinearImage load_record_image(const DatasetManifest& manifest, std::size_t i) {
  const ManifestRecord& r = manifest.records.at(i);
  color::LinearImage img = decode_image(manifest.resolve(r.image), r.linear);
  if (r.mask) img.set_mask(read_mask(manifest.resolve(*r.mask), img.width(), img.height()));
  return img;
}

}  // namespace illumkit::io
