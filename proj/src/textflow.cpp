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

#include "comicpipe/textflow.hpp"

#include <algorithm>
#include <tuple>

namespace comicpipe {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace

void sort_lines(std::vector<OcrLine>& lines) {
  std::stable_sort(lines.begin(), lines.end(), [](const OcrLine& a, const OcrLine& b) {
    return std::tie(a.box.y_min, a.box.x_min) < std::tie(b.box.y_min, b.box.x_min);
  });
}

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::string normalize_balloon(const OcrResult& result, const NormalizeOptions& options) {
  std::string joined;
  for (std::size_t i = 0; i < result.lines.size(); ++i) {
    auto line = collapse_whitespace(result.lines[i].text);
    if (line.empty()) continue;
    if (!joined.empty()) {
      if (options.dehyphenate && joined.size() > 1 && joined.back() == '-' && joined[joined.size() - 2] != '-') {
        joined.pop_back();
      } else {
        joined.push_back(' ');
      }
    }
    joined += line;
  }
  return joined;
}

}  // namespace comicpipe
