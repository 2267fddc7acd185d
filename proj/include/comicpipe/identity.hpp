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

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "comicpipe/backends.hpp"
#include "comicpipe/geometry.hpp"
#include "comicpipe/raster.hpp"

namespace comicpipe {

inline constexpr const char* kUnknownCharacter = "unknown";

// Character name -> zero-shot prompt, namespaced per comic series so that
// look-alikes from different strips never compete for the same crop.
//
// File format: {"<series>": {"<name>": "<prompt>", ...}, ...} with lowercase
// series keys. Insertion order is preserved.
class CharacterLabelRegistry {
 public:
  CharacterLabelRegistry() = default;

  static CharacterLabelRegistry from_json(const nlohmann::ordered_json& document);
  static CharacterLabelRegistry load(const std::filesystem::path& path);
  // The registry shipped with the library (data/registry.json).
  static CharacterLabelRegistry builtin();

  // Throws InvalidInputError on empty/duplicate names, empty prompts or a
  // series key that is not lowercase.
  void add(std::string_view series, std::string_view name, std::string_view prompt);

  bool has_series(std::string_view series) const noexcept;
  std::vector<std::string> series() const;
  // Throws NotFoundError for an unknown series.
  std::span<const CandidateLabel> labels(std::string_view series) const;

  nlohmann::ordered_json to_json() const;

 private:
  std::vector<std::pair<std::string, std::vector<CandidateLabel>>> series_;
};

// Labels of one series only, in registry order.
std::vector<CandidateLabel> candidate_labels(const CharacterLabelRegistry& registry, std::string_view series);

struct IdentifiedCharacter {
  std::string name;
  double score = 0.0;
  BoundingBox box;
};

struct CharacterCrop {
  BoundingBox box;  // source detection, image coordinates
  ImagePayload image;
};

struct IdentifyOptions {
  // Top label below this score becomes "unknown".
  double min_score = 0.0;
  // Concurrent classification requests.
  int jobs = 1;
};

// One classification request per crop; output order follows `crops`.
// A backend failure is rethrown as CropBackendError for the lowest failing index.
std::vector<IdentifiedCharacter> identify_characters(std::span<const CharacterCrop> crops,
                                                     std::string_view series, Transport& classifier,
                                                     const CharacterLabelRegistry& registry,
                                                     const IdentifyOptions& options = {});

// Removes repeats, keeping the first occurrence of each name.
std::vector<std::string> dedupe_names(std::span<const std::string> names);

}  // namespace comicpipe
