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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "comicpipe/geometry.hpp"
#include "comicpipe/raster.hpp"

namespace comicpipe {

// Programmatically drawn strip whose panel layout is its own ground truth.
struct SyntheticStrip {
  std::string image_id;
  RasterImage image;
  std::vector<BoundingBox> panels;  // reading order
  bool black_gutter = false;
  int rows = 1;
};

// 1-8 panels in 1-2 rows, gutters >= 8 px, white or black gutters, with
// figure- and balloon-like shapes inside each panel. Deterministic in
// (seed, index) on every platform.
SyntheticStrip generate_synthetic_strip(std::uint64_t seed, std::size_t index);

std::vector<SyntheticStrip> generate_synthetic_corpus(std::size_t count, std::uint64_t seed);

// Writes <image_id>.png per strip plus ground_truth.json:
// [{"image_id", "file", "width", "height", "rows", "gutter": "white"|"black",
//   "panels": [[x_min, y_min, x_max, y_max], ...]}, ...]
void write_synthetic_corpus(const std::filesystem::path& directory, std::size_t count, std::uint64_t seed);

}  // namespace comicpipe
