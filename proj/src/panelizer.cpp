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

#include "comicpipe/panelizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <tuple>

#include "comicpipe/errors.hpp"

namespace comicpipe {

void require_valid(const PanelizerConfig& config) {
  if (config.binarize_delta < 0 || config.binarize_delta > 255)
    throw InvalidInputError("binarize_delta must be in [0, 255]");
  if (!(config.min_panel_area_frac >= 0.0 && config.min_panel_area_frac <= 1.0))
    throw InvalidInputError("min_panel_area_frac must be in [0, 1]");
  if (!(config.merge_iou >= 0.0 && config.merge_iou <= 1.0))
    throw InvalidInputError("merge_iou must be in [0, 1]");
  if (!(config.containment_frac > 0.0 && config.containment_frac <= 1.0))
    throw InvalidInputError("containment_frac must be in (0, 1]");
  if (!(config.row_tolerance >= 0.0)) throw InvalidInputError("row_tolerance must be >= 0");
}

int estimate_background(const RasterImage& gray) {
  const int w = gray.width(), h = gray.height();
  std::vector<std::uint8_t> ring;
  ring.reserve(2 * static_cast<std::size_t>(w + h));
  for (int x = 0; x < w; ++x) {
    ring.push_back(gray.at(x, 0));
    if (h > 1) ring.push_back(gray.at(x, h - 1));
  }
  for (int y = 1; y + 1 < h; ++y) {
    ring.push_back(gray.at(0, y));
    if (w > 1) ring.push_back(gray.at(w - 1, y));
  }
  auto mid = ring.begin() + static_cast<std::ptrdiff_t>(ring.size() / 2);
  std::nth_element(ring.begin(), mid, ring.end());
  return *mid;
}

namespace {

// Bounding boxes of 4-connected foreground components.
std::vector<BoundingBox> component_boxes(const std::vector<std::uint8_t>& mask, int w, int h) {
  std::vector<std::int32_t> label(mask.size(), -1);
  std::vector<std::int32_t> stack;
  std::vector<BoundingBox> boxes;
  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      const auto start = static_cast<std::size_t>(y0) * w + x0;
      if (!mask[start] || label[start] >= 0) continue;
      const auto id = static_cast<std::int32_t>(boxes.size());
      int x_lo = x0, x_hi = x0, y_lo = y0, y_hi = y0;
      label[start] = id;
      stack.assign(1, static_cast<std::int32_t>(start));
      while (!stack.empty()) {
        const auto p = stack.back();
        stack.pop_back();
        const int x = p % w, y = p / w;
        x_lo = std::min(x_lo, x);
        x_hi = std::max(x_hi, x);
        y_lo = std::min(y_lo, y);
        y_hi = std::max(y_hi, y);
        auto visit = [&](std::int32_t q) {
          if (mask[q] && label[q] < 0) {
            label[q] = id;
            stack.push_back(q);
          }
        };
        if (x > 0) visit(p - 1);
        if (x + 1 < w) visit(p + 1);
        if (y > 0) visit(p - w);
        if (y + 1 < h) visit(p + w);
      }
      boxes.push_back({static_cast<double>(x_lo), static_cast<double>(y_lo),
                       static_cast<double>(x_hi + 1), static_cast<double>(y_hi + 1)});
    }
  }
  return boxes;
}

bool should_merge(const BoundingBox& a, const BoundingBox& b, const PanelizerConfig& config) {
  if (iou(a, b) > config.merge_iou) return true;
  const double smaller = std::min(a.area(), b.area());
  return smaller > 0.0 && intersection_area(a, b) >= config.containment_frac * smaller;
}

bool position_less(const BoundingBox& a, const BoundingBox& b) {
  return std::tie(a.y_min, a.x_min, a.y_max, a.x_max) < std::tie(b.y_min, b.x_min, b.y_max, b.x_max);
}

std::vector<BoundingBox> merge_overlapping(std::vector<BoundingBox> boxes, const PanelizerConfig& config) {
  std::sort(boxes.begin(), boxes.end(), position_less);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < boxes.size() && !changed; ++i) {
      for (std::size_t j = i + 1; j < boxes.size(); ++j) {
        if (should_merge(boxes[i], boxes[j], config)) {
          boxes[i] = enclosing(boxes[i], boxes[j]);
          boxes.erase(boxes.begin() + static_cast<std::ptrdiff_t>(j));
          changed = true;
          break;
        }
      }
    }
  }
  return boxes;
}

}  // namespace

std::vector<BoundingBox> extract_panels(const RasterImage& image, const PanelizerConfig& config) {
  require_valid(image);
  require_valid(config);
  const auto gray = image.to_gray();
  const int w = gray.width(), h = gray.height();
  const int background = estimate_background(gray);

  std::vector<std::uint8_t> mask(static_cast<std::size_t>(w) * h);
  const auto px = gray.pixels();
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask[i] = std::abs(static_cast<int>(px[i]) - background) > config.binarize_delta ? 1 : 0;
  }

  std::vector<BoundingBox> candidates;
  for (const auto& box : component_boxes(mask, w, h)) {
    if (area_fraction(box, w, h) >= config.min_panel_area_frac) candidates.push_back(box);
  }
  auto panels = merge_overlapping(std::move(candidates), config);
  if (panels.empty()) panels.push_back({0.0, 0.0, static_cast<double>(w), static_cast<double>(h)});
  return panels;
}

std::vector<BoundingBox> reading_order(std::span<const BoundingBox> boxes, double row_tolerance) {
  if (boxes.empty()) return {};
  std::vector<BoundingBox> sorted(boxes.begin(), boxes.end());
  std::sort(sorted.begin(), sorted.end(), [](const BoundingBox& a, const BoundingBox& b) {
    return std::make_tuple(a.center_y(), a.x_min, a.y_min, a.x_max, a.y_max) <
           std::make_tuple(b.center_y(), b.x_min, b.y_min, b.x_max, b.y_max);
  });

  std::vector<double> heights;
  heights.reserve(sorted.size());
  for (const auto& b : sorted) heights.push_back(b.height());
  std::sort(heights.begin(), heights.end());
  const auto n = heights.size();
  const double median_height = n % 2 ? heights[n / 2] : 0.5 * (heights[n / 2 - 1] + heights[n / 2]);
  const double tolerance = row_tolerance * median_height;

  // Chain boxes whose successive vertical centers are within tolerance.
  std::vector<std::vector<BoundingBox>> rows;
  for (const auto& b : sorted) {
    if (rows.empty() || b.center_y() - rows.back().back().center_y() > tolerance) rows.emplace_back();
    rows.back().push_back(b);
  }

  auto mean_center = [](const std::vector<BoundingBox>& row) {
    double sum = 0.0;
    for (const auto& b : row) sum += b.center_y();
    return sum / static_cast<double>(row.size());
  };
  std::stable_sort(rows.begin(), rows.end(), [&](const auto& a, const auto& b) {
    return mean_center(a) < mean_center(b);
  });

  std::vector<BoundingBox> ordered;
  ordered.reserve(sorted.size());
  for (auto& row : rows) {
    std::sort(row.begin(), row.end(), [](const BoundingBox& a, const BoundingBox& b) {
      return std::tie(a.x_min, a.y_min, a.x_max, a.y_max) < std::tie(b.x_min, b.y_min, b.x_max, b.y_max);
    });
    ordered.insert(ordered.end(), row.begin(), row.end());
  }
  return ordered;
}

std::vector<Panel> segment_panels(const RasterImage& image, const PanelizerConfig& config) {
  const auto boxes = reading_order(extract_panels(image, config), config.row_tolerance);
  std::vector<Panel> panels;
  panels.reserve(boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    Panel p;
    p.index = static_cast<int>(i);
    p.box = boxes[i];
    panels.push_back(std::move(p));
  }
  return panels;
}

}  // namespace comicpipe
