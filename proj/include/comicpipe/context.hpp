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
#include <string_view>
#include <vector>

#include "comicpipe/panelizer.hpp"

namespace comicpipe {

struct PanelContext {
  std::string key;  // "panel N", N 1-based
  std::vector<std::string> characters;
  std::vector<std::string> texts;

  friend bool operator==(const PanelContext&, const PanelContext&) = default;
};

// Per-panel characters and dialogue, in reading order. Serialized as
// {"panel 1": {"characters": [...], "texts": [...]}, "panel 2": ...}.
struct ComicContext {
  std::vector<PanelContext> panels;

  friend bool operator==(const ComicContext&, const ComicContext&) = default;
};

// Throws InvalidInputError unless keys run "panel 1", "panel 2", ... and no
// panel repeats a character.
void require_valid(const ComicContext& context);

// Panel i becomes "panel i+1". Character names are deduplicated; panels
// without elements keep their key with empty lists.
ComicContext build_context(std::span<const Panel> panels);

// Single-line canonical JSON: ": " after keys, ", " between items, objects in
// panel order. Non-ASCII text is written as raw UTF-8.
std::string serialize_context(const ComicContext& context);

// Inverse of serialize_context for any JSON with the same structure.
// Throws InvalidInputError.
ComicContext parse_context(std::string_view json_text);

}  // namespace comicpipe
