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
#include "comicpipe/panelizer.hpp"

namespace comicpipe {

inline constexpr const char* kTextLabel = "text";
inline constexpr const char* kCharacterLabel = "character";

struct DetectorConfig {
  // Forwarded to the detector backend; phrase grounding happens there.
  double text_threshold = 0.2;
  // Forwarded and also enforced locally.
  double box_threshold = 0.2;
  double nms_iou = 0.5;
  double max_text_area_frac = 0.8;
  // Extend the oversized-box filter from "text" to every label.
  bool area_filter_all_classes = false;
};

void require_valid(const DetectorConfig& config);

// Confidence gate, oversized text-box removal, then per-label NMS.
std::vector<Detection> filter_detections(std::span<const Detection> raw, double image_width,
                                         double image_height, const DetectorConfig& config = {});

// Gives each detection to the panel it overlaps most (nearest center when it
// overlaps none) and orders each panel's elements top-then-left.
// `panels` must be non-empty; existing elements are replaced.
std::vector<Panel> assign_to_panels(std::vector<Panel> panels, std::span<const Detection> detections);

}  // namespace comicpipe
