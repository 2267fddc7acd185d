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

#include <span>
#include <string>
#include <vector>

#include "comicpipe/geometry.hpp"
#include "comicpipe/raster.hpp"

namespace comicpipe {

struct PanelizerConfig {
  // A pixel is foreground iff |intensity - background| > binarize_delta.
  int binarize_delta = 32;
  // Components whose bounding box covers less of the image are dropped.
  double min_panel_area_frac = 0.02;
  // Boxes overlapping by more than this IoU are merged.
  double merge_iou = 0.2;
  // A box whose area lies at least this much inside a larger box is folded
  // into it (figures and balloons drawn inside a panel).
  double containment_frac = 0.9;
  // Row clustering tolerance, in units of the median box height.
  double row_tolerance = 0.5;
};

// Throws InvalidInputError for out-of-range values.
void require_valid(const PanelizerConfig& config);

// One panel of a strip with the elements assigned to it.
struct Panel {
  int index = 0;  // 0-based reading position
  BoundingBox box;
  std::vector<Detection> elements;  // filled by assign_to_panels
  std::vector<std::string> characters;
  std::vector<std::string> texts;
};

// Median intensity of the one-pixel border ring.
int estimate_background(const RasterImage& gray);

// Panel boxes found by gutter/background separation. Never empty: when no
// component qualifies the whole image is returned.
std::vector<BoundingBox> extract_panels(const RasterImage& image, const PanelizerConfig& config = {});

// Rows top-to-bottom, left-to-right within a row. Output is a permutation of
// the input and does not depend on input order.
std::vector<BoundingBox> reading_order(std::span<const BoundingBox> boxes, double row_tolerance = 0.5);

// extract_panels + reading_order, wrapped as indexed Panels.
std::vector<Panel> segment_panels(const RasterImage& image, const PanelizerConfig& config = {});

}  // namespace comicpipe
