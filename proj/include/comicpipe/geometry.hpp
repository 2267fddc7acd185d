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

namespace comicpipe {

// Axis-aligned rectangle in pixel space. Origin is top-left, y grows down.
// Width is (x_max - x_min) for integer and real coordinates alike, so an
// integer box [0, 10) x [0, 10) is written (0, 0, 10, 10) and has area 100.
struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const noexcept { return x_max - x_min; }
  double height() const noexcept { return y_max - y_min; }
  double area() const noexcept { return width() * height(); }
  double center_x() const noexcept { return 0.5 * (x_min + x_max); }
  double center_y() const noexcept { return 0.5 * (y_min + y_max); }

  // Non-negative ordered coordinates.
  bool valid() const noexcept;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

// Throws InvalidInputError unless box.valid().
void require_valid(const BoundingBox& box);

struct Detection {
  BoundingBox box;
  std::string label;
  double confidence = 0.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

// Throws InvalidInputError on an invalid box, empty label or confidence outside [0, 1].
void require_valid(const Detection& detection);

double intersection_area(const BoundingBox& a, const BoundingBox& b) noexcept;

// Intersection over union; 0 when the union is empty.
double iou(const BoundingBox& a, const BoundingBox& b) noexcept;

BoundingBox clip(const BoundingBox& box, double width, double height) noexcept;

// Area of `box` clipped to the image, divided by the image area.
// Throws InvalidInputError for a zero-sized image.
double area_fraction(const BoundingBox& box, double image_width, double image_height);

// Smallest box covering both inputs.
BoundingBox enclosing(const BoundingBox& a, const BoundingBox& b) noexcept;

// Deterministic ranking used by NMS and evaluation: higher confidence first,
// then smaller x_min, then smaller y_min, then the remaining coordinates.
bool ranks_before(const BoundingBox& a, double conf_a, const BoundingBox& b,
                  double conf_b) noexcept;

// Greedy per-label non-maximum suppression. A detection survives iff its IoU
// with every previously kept detection of the same label is <= iou_threshold.
// Survivors come back in global rank order (see ranks_before), which keeps
// every label confidence-descending.
std::vector<Detection> nms(std::span<const Detection> detections, double iou_threshold);

}  // namespace comicpipe
