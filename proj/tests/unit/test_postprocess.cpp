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

#include <gtest/gtest.h>

#include "comicpipe/errors.hpp"
#include "comicpipe/postprocess.hpp"

using namespace comicpipe;

TEST(FilterDetections, ConfidenceGate) {
  const std::vector<Detection> raw = {{{0, 0, 10, 10}, "text", 0.19}, {{20, 0, 30, 10}, "text", 0.2}};
  const auto kept = filter_detections(raw, 100, 100);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].confidence, 0.2);
}

TEST(FilterDetections, OversizedTextDroppedCharactersKept) {
  const std::vector<Detection> raw = {{{0, 0, 95, 95}, "text", 0.9}, {{0, 0, 95, 95}, "character", 0.9}};
  const auto kept = filter_detections(raw, 100, 100);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].label, "character");

  DetectorConfig all;
  all.area_filter_all_classes = true;
  EXPECT_TRUE(filter_detections(raw, 100, 100, all).empty());
}

TEST(FilterDetections, NmsAfterGates) {
  const std::vector<Detection> raw = {
      {{0, 0, 10, 10}, "character", 0.9}, {{1, 0, 11, 10}, "character", 0.8}, {{50, 50, 60, 60}, "character", 0.4}};
  const auto kept = filter_detections(raw, 100, 100);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].confidence, 0.9);
  EXPECT_EQ(kept[1].confidence, 0.4);
}

TEST(FilterDetections, RejectsBadConfig) {
  DetectorConfig c;
  c.nms_iou = 1.5;
  EXPECT_THROW(filter_detections({}, 10, 10, c), InvalidInputError);
  c = {};
  c.max_text_area_frac = 0.0;
  EXPECT_THROW(require_valid(c), InvalidInputError);
}

namespace {

std::vector<Panel> two_panels() {
  std::vector<Panel> panels(2);
  panels[0].index = 0;
  panels[0].box = {0, 0, 100, 100};
  panels[1].index = 1;
  panels[1].box = {110, 0, 210, 100};
  return panels;
}

}  // namespace

TEST(AssignToPanels, MaxOverlapWins) {
  const std::vector<Detection> dets = {{{90, 10, 130, 20}, "text", 0.5}};  // 10 px in panel 1, 20 in panel 2
  const auto panels = assign_to_panels(two_panels(), dets);
  EXPECT_TRUE(panels[0].elements.empty());
  ASSERT_EQ(panels[1].elements.size(), 1u);
}

TEST(AssignToPanels, NoOverlapGoesToNearestCenter) {
  const std::vector<Detection> dets = {{{101, 40, 108, 60}, "character", 0.5}};  // in the gutter, nearer panel 1
  const auto panels = assign_to_panels(two_panels(), dets);
  EXPECT_EQ(panels[0].elements.size(), 1u);
}

TEST(AssignToPanels, ElementsTopThenLeft) {
  const std::vector<Detection> dets = {
      {{60, 50, 90, 90}, "character", 0.9}, {{10, 50, 40, 90}, "character", 0.3}, {{10, 5, 90, 30}, "text", 0.2}};
  const auto panels = assign_to_panels(two_panels(), dets);
  ASSERT_EQ(panels[0].elements.size(), 3u);
  EXPECT_EQ(panels[0].elements[0].label, "text");
  EXPECT_EQ(panels[0].elements[1].box.x_min, 10);
  EXPECT_EQ(panels[0].elements[2].box.x_min, 60);
}

TEST(AssignToPanels, EveryDetectionAssignedOnce) {
  std::vector<Detection> dets;
  for (int i = 0; i < 30; ++i) dets.push_back({{i * 7.0, i * 3.0, i * 7.0 + 5, i * 3.0 + 5}, "text", 0.5});
  const auto panels = assign_to_panels(two_panels(), dets);
  EXPECT_EQ(panels[0].elements.size() + panels[1].elements.size(), dets.size());
}

TEST(AssignToPanels, NeedsPanels) {
  EXPECT_THROW(assign_to_panels({}, {}), InvalidInputError);
}
