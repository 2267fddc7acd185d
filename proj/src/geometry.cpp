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

#include "comicpipe/geometry.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "comicpipe/errors.hpp"

namespace comicpipe {

bool BoundingBox::valid() const noexcept {
  return x_min >= 0.0 && y_min >= 0.0 && x_min <= x_max && y_min <= y_max;
}

void require_valid(const BoundingBox& box) {
  if (!box.valid()) {
    throw InvalidInputError("invalid bounding box (" + std::to_string(box.x_min) + ", " +
                            std::to_string(box.y_min) + ", " + std::to_string(box.x_max) +
                            ", " + std::to_string(box.y_max) + ")");
  }
}

void require_valid(const Detection& detection) {
  require_valid(detection.box);
  if (detection.label.empty()) throw InvalidInputError("detection label is empty");
  if (!(detection.confidence >= 0.0 && detection.confidence <= 1.0)) {
    throw InvalidInputError("detection confidence outside [0, 1]: " +
                            std::to_string(detection.confidence));
  }
}

double intersection_area(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

BoundingBox clip(const BoundingBox& box, double width, double height) noexcept {
  BoundingBox out;
  out.x_min = std::clamp(box.x_min, 0.0, width);
  out.y_min = std::clamp(box.y_min, 0.0, height);
  out.x_max = std::clamp(box.x_max, out.x_min, width);
  out.y_max = std::clamp(box.y_max, out.y_min, height);
  return out;
}

double area_fraction(const BoundingBox& box, double image_width, double image_height) {
  if (!(image_width > 0.0) || !(image_height > 0.0)) {
    throw InvalidInputError("image dimensions must be positive");
  }
  return clip(box, image_width, image_height).area() / (image_width * image_height);
}

BoundingBox enclosing(const BoundingBox& a, const BoundingBox& b) noexcept {
  return {std::min(a.x_min, b.x_min), std::min(a.y_min, b.y_min), std::max(a.x_max, b.x_max),
          std::max(a.y_max, b.y_max)};
}

bool ranks_before(const BoundingBox& a, double conf_a, const BoundingBox& b,
                  double conf_b) noexcept {
  return std::make_tuple(-conf_a, a.x_min, a.y_min, a.x_max, a.y_max) <
         std::make_tuple(-conf_b, b.x_min, b.y_min, b.x_max, b.y_max);
}

std::vector<Detection> nms(std::span<const Detection> detections, double iou_threshold) {
  std::vector<Detection> order(detections.begin(), detections.end());
  std::stable_sort(order.begin(), order.end(), [](const Detection& a, const Detection& b) {
    if (ranks_before(a.box, a.confidence, b.box, b.confidence)) return true;
    if (ranks_before(b.box, b.confidence, a.box, a.confidence)) return false;
    return a.label < b.label;
  });

  std::map<std::string, std::vector<BoundingBox>> kept_by_label;
  std::vector<Detection> kept;
  for (auto& d : order) {
    auto& same_label = kept_by_label[d.label];
    const bool suppressed = std::any_of(same_label.begin(), same_label.end(),
                                        [&](const BoundingBox& k) { return iou(d.box, k) > iou_threshold; });
    if (suppressed) continue;
    same_label.push_back(d.box);
    kept.push_back(std::move(d));
  }
  return kept;
}

}  // namespace comicpipe
