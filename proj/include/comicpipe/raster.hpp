// Copyright 2026 The comicpipe Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "comicpipe/geometry.hpp"

namespace comicpipe {

// Decoded 8-bit image, row-major, interleaved channels (1 = gray, 3 = RGB).
class RasterImage {
 public:
  RasterImage() = default;
  // Filled with `fill` in every channel.
  RasterImage(int width, int height, int channels, std::uint8_t fill = 0);
  RasterImage(int width, int height, int channels, std::vector<std::uint8_t> pixels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  bool empty() const noexcept { return pixels_.empty(); }

  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
  std::span<std::uint8_t> pixels() noexcept { return pixels_; }

  std::uint8_t at(int x, int y, int c = 0) const {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  std::uint8_t& at(int x, int y, int c = 0) {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  // Rec.601 luma, rounded.
  std::uint8_t intensity(int x, int y) const;

  RasterImage to_gray() const;

  // Sets every channel of the pixels inside `box` (integer-snapped, clipped).
  void fill_rect(const BoundingBox& box, std::uint8_t value);

  // Pixels covered by `box` after snapping outward to whole pixels and
  // clipping. Throws InvalidInputError if the result is empty.
  RasterImage crop(const BoundingBox& box) const;

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> pixels_;
};

// Throws InvalidInputError unless the image has positive size and a
// consistent pixel count.
void require_valid(const RasterImage& image);

// Encoded image bytes as they travel to a backend, plus decoded dimensions
// for validating returned geometry.
struct ImagePayload {
  std::vector<std::uint8_t> bytes;
  int width = 0;
  int height = 0;
};

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

// Sniffs PNG or JPEG from the magic bytes. Throws DecodeError.
RasterImage decode_image(std::span<const std::uint8_t> bytes);
RasterImage load_image(const std::filesystem::path& path);

// PNG writer with stored (uncompressed) deflate blocks and no filtering, so the
// bytes depend only on the pixels.
std::vector<std::uint8_t> encode_png(const RasterImage& image);
std::vector<std::uint8_t> encode_jpeg(const RasterImage& image, int quality = 90);

ImagePayload to_payload(const RasterImage& image);

}  // namespace comicpipe
