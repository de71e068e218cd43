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

#include "illumkit/io/image_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <string>

#include "illumkit/common/binary_io.hpp"

namespace illumkit::io {

namespace {

// Netpbm-style header tokenizer: whitespace separated, '#' comments to end of line.
class HeaderReader {
 public:
  HeaderReader(std::span<const std::uint8_t> bytes, std::string what) : bytes_(bytes), what_(std::move(what)) {}

  std::string token() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_])) ++pos_;
    if (start == pos_) throw DataError(what_ + ": truncated header");
    return std::string(bytes_.begin() + static_cast<std::ptrdiff_t>(start),
                       bytes_.begin() + static_cast<std::ptrdiff_t>(pos_));
  }

  std::size_t number() {
    const std::string t = token();
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size()) throw DataError(what_ + ": bad header field '" + t + "'");
    return v;
  }

  // Consumes the single whitespace byte that ends a binary header.
  void end_header() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) throw DataError(what_ + ": malformed header");
    ++pos_;
  }

  std::size_t pos() const noexcept { return pos_; }
  std::span<const std::uint8_t> rest() const { return bytes_.subspan(pos_); }

 private:
  void skip_space() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::string what_;
};

std::string magic_of(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2) throw DataError("file too short for an image header");
  return std::string{static_cast<char>(bytes[0]), static_cast<char>(bytes[1])};
}

void check_size(std::size_t w, std::size_t h, const std::string& what) {
  if (w == 0 || h == 0) throw DataError(what + ": zero image dimension");
  if (w > (1u << 16) || h > (1u << 16)) throw DataError(what + ": image dimension too large");
}

}  // namespace

color::LinearImage decode_pfm(std::span<const std::uint8_t> bytes) {
  HeaderReader hdr(bytes, "PFM");
  const std::string magic = hdr.token();
  if (magic != "PF") throw DataError("PFM: unsupported magic '" + magic + "' (only 3-channel PF)");
  const std::size_t w = hdr.number();
  const std::size_t h = hdr.number();
  check_size(w, h, "PFM");
  const std::string scale_text = hdr.token();
  double scale = 0.0;
  try {
    scale = std::stod(scale_text);
  } catch (const std::exception&) {
    throw DataError("PFM: bad scale '" + scale_text + "'");
  }
  if (scale == 0.0 || !std::isfinite(scale)) throw DataError("PFM: bad scale '" + scale_text + "'");
  hdr.end_header();
  const bool little = scale < 0.0;
  const auto data = hdr.rest();
  const std::size_t need = w * h * 3 * 4;
  if (data.size() < need) {
    throw DataError("PFM: truncated payload (" + std::to_string(data.size()) + " of " + std::to_string(need) +
                    " bytes)");
  }
  if (data.size() > need) throw DataError("PFM: trailing bytes after payload");
  color::LinearImage img(w, h);
  std::size_t k = 0;
  for (std::size_t row = 0; row < h; ++row) {
    const std::size_t y = h - 1 - row;
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < 3; ++c, k += 4) {
        std::uint32_t u = 0;
        for (int i = 0; i < 4; ++i) {
          const std::uint32_t b = data[k + static_cast<std::size_t>(i)];
          u |= little ? b << (8 * i) : b << (8 * (3 - i));
        }
        img.at(x, y, c) = std::bit_cast<float>(u);
      }
    }
  }
  return img;
}

std::vector<std::uint8_t> encode_pfm(const color::LinearImage& image) {
  ByteWriter out;
  out.raw("PF\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n-1.0\n");
  for (std::size_t row = 0; row < image.height(); ++row) {
    const std::size_t y = image.height() - 1 - row;
    for (std::size_t x = 0; x < image.width(); ++x) {
      for (std::size_t c = 0; c < 3; ++c) out.f32(image.at(x, y, c));
    }
  }
  return out.bytes();
}

color::LinearImage decode_ppm(std::span<const std::uint8_t> bytes, bool linear) {
  HeaderReader hdr(bytes, "PPM");
  const std::string magic = hdr.token();
  if (magic != "P6") throw DataError("PPM: unsupported magic '" + magic + "'");
  const std::size_t w = hdr.number();
  const std::size_t h = hdr.number();
  const std::size_t maxval = hdr.number();
  check_size(w, h, "PPM");
  if (maxval == 0 || maxval > 65535) throw DataError("PPM: maxval out of range");
  hdr.end_header();
  const std::size_t bps = maxval < 256 ? 1 : 2;
  const auto data = hdr.rest();
  const std::size_t need = w * h * 3 * bps;
  if (data.size() < need) {
    throw DataError("PPM: truncated payload (" + std::to_string(data.size()) + " of " + std::to_string(need) +
                    " bytes)");
  }
  color::LinearImage img(w, h);
  auto px = img.pixels();
  for (std::size_t i = 0; i < w * h * 3; ++i) {
    const std::size_t raw = bps == 1 ? data[i] : (std::size_t{data[2 * i]} << 8) | data[2 * i + 1];
    if (raw > maxval) throw DataError("PPM: sample exceeds maxval");
    const double v = static_cast<double>(raw) / static_cast<double>(maxval);
    px[i] = static_cast<float>(linear ? v : color::gamma_decode(v));
  }
  return img;
}

std::vector<std::uint8_t> encode_ppm(const color::LinearImage& image, std::uint32_t maxval) {
  if (maxval == 0 || maxval > 65535) throw ConfigError("PPM maxval must lie in [1, 65535]");
  ByteWriter out;
  out.raw("P6\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n" +
          std::to_string(maxval) + "\n");
  for (float v : image.pixels()) {
    const auto q = static_cast<std::uint32_t>(std::lround(std::clamp(static_cast<double>(v), 0.0, 1.0) * maxval));
    if (maxval < 256) {
      out.u8(static_cast<std::uint8_t>(q));
    } else {
      out.u8(static_cast<std::uint8_t>(q >> 8));
      out.u8(static_cast<std::uint8_t>(q & 0xff));
    }
  }
  return out.bytes();
}

std::vector<std::uint8_t> decode_mask(std::span<const std::uint8_t> bytes, std::size_t& width, std::size_t& height) {
  HeaderReader hdr(bytes, "mask");
  const std::string magic = hdr.token();
  if (magic != "P1" && magic != "P2" && magic != "P4" && magic != "P5") {
    throw DataError("mask: unsupported magic '" + magic + "' (expected PBM or PGM)");
  }
  width = hdr.number();
  height = hdr.number();
  check_size(width, height, "mask");
  const bool bitmap = magic == "P1" || magic == "P4";
  std::size_t maxval = 1;
  if (!bitmap) {
    maxval = hdr.number();
    if (maxval == 0 || maxval > 65535) throw DataError("mask: maxval out of range");
  }
  const std::size_t n = width * height;
  std::vector<std::uint8_t> mask(n);
  if (magic == "P1" || magic == "P2") {
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t v = 0;
      if (magic == "P1") {
        // PBM plain samples may be packed without separators.
        const std::string t = hdr.token();
        for (std::size_t j = 0; j < t.size(); ++j) {
          if (t[j] != '0' && t[j] != '1') throw DataError("mask: bad PBM sample");
          if (i + j >= n) throw DataError("mask: too many samples");
          mask[i + j] = t[j] == '1';
        }
        i += t.size() - 1;
        continue;
      }
      v = hdr.number();
      if (v > maxval) throw DataError("mask: sample exceeds maxval");
      mask[i] = v != 0;
    }
    return mask;
  }
  hdr.end_header();
  const auto data = hdr.rest();
  if (magic == "P4") {
    const std::size_t stride = (width + 7) / 8;
    if (data.size() < stride * height) throw DataError("mask: truncated PBM payload");
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) mask[y * width + x] = (data[y * stride + x / 8] >> (7 - x % 8)) & 1;
    }
    return mask;
  }
  const std::size_t bps = maxval < 256 ? 1 : 2;
  if (data.size() < n * bps) throw DataError("mask: truncated PGM payload");
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t v = bps == 1 ? data[i] : (std::size_t{data[2 * i]} << 8) | data[2 * i + 1];
    mask[i] = v != 0;
  }
  return mask;
}

std::vector<std::uint8_t> encode_mask(std::span<const std::uint8_t> mask, std::size_t width, std::size_t height) {
  if (mask.size() != width * height) throw ShapeError("mask size does not match its dimensions");
  ByteWriter out;
  out.raw("P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n");
  for (auto m : mask) out.u8(m ? 255 : 0);
  return out.bytes();
}

color::LinearImage decode_image(const std::filesystem::path& path, bool linear) {
  const auto bytes = read_file_bytes(path);
  try {
    const std::string magic = magic_of(bytes);
    color::LinearImage img;
    if (magic == "PF") {
      img = decode_pfm(bytes);
    } else if (magic == "P6") {
      img = decode_ppm(bytes, linear);
    } else {
      throw DataError("unknown image magic '" + magic + "'");
    }
    img.validate();
    return img;
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_pfm(const std::filesystem::path& path, const color::LinearImage& image) {
  write_file_bytes(path, encode_pfm(image));
}

void write_ppm(const std::filesystem::path& path, const color::LinearImage& image, std::uint32_t maxval) {
  write_file_bytes(path, encode_ppm(image, maxval));
}

std::vector<std::uint8_t> read_mask(const std::filesystem::path& path, std::size_t width, std::size_t height) {
  const auto bytes = read_file_bytes(path);
  std::size_t w = 0, h = 0;
  std::vector<std::uint8_t> mask;
  try {
    mask = decode_mask(bytes, w, h);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  if (w != width || h != height) {
    throw DataError(path.string() + ": mask is " + std::to_string(w) + "x" + std::to_string(h) + ", image is " +
                    std::to_string(width) + "x" + std::to_string(height));
  }
  return mask;
}

void write_mask(const std::filesystem::path& path, std::span<const std::uint8_t> mask, std::size_t width,
                std::size_t height) {
  write_file_bytes(path, encode_mask(mask, width, height));
}

}  // namespace illumkit::io
