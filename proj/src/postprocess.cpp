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

#include "comicpipe/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "comicpipe/errors.hpp"

namespace comicpipe {

namespace {

bool in_unit_interval(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

void require_valid(const DetectorConfig& config) {
  if (!in_unit_interval(config.text_threshold)) throw InvalidInputError("text_threshold must be in [0, 1]");
  if (!in_unit_interval(config.box_threshold)) throw InvalidInputError("box_threshold must be in [0, 1]");
  if (!in_unit_interval(config.nms_iou)) throw InvalidInputError("nms_iou must be in [0, 1]");
  if (!(config.max_text_area_frac > 0.0 && config.max_text_area_frac <= 1.0))
    throw InvalidInputError("max_text_area_frac must be in (0, 1]");
}

std::vector<Detection> filter_detections(std::span<const Detection> raw, double image_width,
                                         double image_height, const DetectorConfig& config) {
  require_valid(config);
  std::vector<Detection> survivors;
  survivors.reserve(raw.size());
  for (const auto& d : raw) {
    if (d.confidence < config.box_threshold) continue;
    const bool area_filtered = config.area_filter_all_classes || d.label == kTextLabel;
    if (area_filtered && area_fraction(d.box, image_width, image_height) > config.max_text_area_frac) continue;
    survivors.push_back(d);
  }
  return nms(survivors, config.nms_iou);
}

std::vector<Panel> assign_to_panels(std::vector<Panel> panels, std::span<const Detection> detections) {
  if (panels.empty()) throw InvalidInputError("assign_to_panels needs at least one panel");
  for (auto& p : panels) p.elements.clear();

  for (const auto& d : detections) {
    std::size_t best = 0;
    double best_overlap = 0.0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
      const double overlap = intersection_area(d.box, panels[i].box);
      if (overlap > best_overlap) {
        best_overlap = overlap;
        best = i;
      }
    }
    if (best_overlap <= 0.0) {
      double best_distance = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < panels.size(); ++i) {
        const double distance = std::hypot(d.box.center_x() - panels[i].box.center_x(),
                                           d.box.center_y() - panels[i].box.center_y());
        if (distance < best_distance) {
          best_distance = distance;
          best = i;
        }
      }
    }
    panels[best].elements.push_back(d);
  }

  for (auto& p : panels) {
    std::stable_sort(p.elements.begin(), p.elements.end(), [](const Detection& a, const Detection& b) {
      return std::make_tuple(a.box.y_min, a.box.x_min, a.label, -a.confidence) <
             std::make_tuple(b.box.y_min, b.box.x_min, b.label, -b.confidence);
    });
  }
  return panels;
}

}  // namespace comicpipe
