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

#include <string>
#include <string_view>
#include <vector>

#include "comicpipe/geometry.hpp"

namespace comicpipe {

struct OcrLine {
  std::string text;
  BoundingBox box;  // relative to the OCR'd crop

  friend bool operator==(const OcrLine&, const OcrLine&) = default;
};

struct OcrResult {
  BoundingBox box;  // the text detection the crop came from, image coordinates
  std::vector<OcrLine> lines;
};

// Top-to-bottom by y_min, then left-to-right by x_min. Stable for ties.
void sort_lines(std::vector<OcrLine>& lines);

// Collapses every whitespace run to one space and trims both ends.
std::string collapse_whitespace(std::string_view text);

struct NormalizeOptions {
  // Join "ARBI-" + "TRARY." into "ARBITRARY." Off by default: published
  // contexts keep the hyphenation artifact.
  bool dehyphenate = false;
};

// Joins the lines of one balloon, in the order given (see sort_lines), into a
// single dialogue string. Case and punctuation are kept exactly as recognized.
std::string normalize_balloon(const OcrResult& result, const NormalizeOptions& options = {});

}  // namespace comicpipe
