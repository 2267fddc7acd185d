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

#include <algorithm>
#include <set>

#include "comicpipe/panelizer.hpp"
#include "comicpipe/synthetic.hpp"
#include "support/fakes.hpp"
#include "support/oracles.hpp"

using namespace comicpipe;

TEST(Synthetic, DeterministicInSeedAndIndex) {
  const auto a = generate_synthetic_strip(7, 13), b = generate_synthetic_strip(7, 13);
  EXPECT_EQ(a.image_id, b.image_id);
  EXPECT_EQ(a.panels, b.panels);
  EXPECT_TRUE(std::ranges::equal(a.image.pixels(), b.image.pixels()));
  const auto c = generate_synthetic_strip(8, 13);
  EXPECT_FALSE(c.panels == a.panels && std::ranges::equal(c.image.pixels(), a.image.pixels()));
}

TEST(Synthetic, LayoutCoversTheAdvertisedRange) {
  std::set<std::size_t> counts;
  std::set<int> rows;
  std::set<bool> gutters;
  for (const auto& s : generate_synthetic_corpus(100, 7)) {
    ASSERT_GE(s.panels.size(), 1u);
    ASSERT_LE(s.panels.size(), 8u);
    ASSERT_TRUE(s.rows == 1 || s.rows == 2);
    counts.insert(s.panels.size());
    rows.insert(s.rows);
    gutters.insert(s.black_gutter);
    for (std::size_t i = 0; i < s.panels.size(); ++i) {
      EXPECT_TRUE(s.panels[i].valid());
      EXPECT_LE(s.panels[i].x_max, s.image.width());
      EXPECT_LE(s.panels[i].y_max, s.image.height());
      for (std::size_t j = i + 1; j < s.panels.size(); ++j) EXPECT_EQ(intersection_area(s.panels[i], s.panels[j]), 0.0);
    }
    // Ground truth is already in reading order.
    EXPECT_EQ(reading_order(s.panels), s.panels);
  }
  EXPECT_EQ(counts.size(), 8u);
  EXPECT_EQ(rows.size(), 2u);
  EXPECT_EQ(gutters.size(), 2u);
}

TEST(Synthetic, PanelizerRecoversPanels) {
  for (const auto& s : generate_synthetic_corpus(30, 11)) {
    const auto found = extract_panels(s.image);
    ASSERT_EQ(found.size(), s.panels.size()) << s.image_id;
    for (const auto& gt : s.panels) {
      double best = 0;
      for (const auto& f : found) best = std::max(best, oracle::iou(gt, f));
      EXPECT_GE(best, 0.9) << s.image_id;
    }
  }
}

TEST(Synthetic, WritesCorpus) {
  testing_support::TempDir dir("synthetic");
  write_synthetic_corpus(dir.path(), 3, 5);
  const auto gt = nlohmann::json::parse(testing_support::read_text(dir / "ground_truth.json"));
  ASSERT_EQ(gt.size(), 3u);
  for (const auto& e : gt) {
    EXPECT_TRUE(std::filesystem::exists(dir / e["file"].get<std::string>()));
    EXPECT_EQ(decode_image(read_file_bytes(dir / e["file"].get<std::string>())).width(), e["width"].get<int>());
  }
}
