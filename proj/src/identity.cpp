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

#include "comicpipe/identity.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <fstream>
#include <thread>
#include <unordered_set>

#include "comicpipe/errors.hpp"

namespace comicpipe {

namespace detail {
extern const char* const kBuiltinRegistryJson;
}  // namespace detail

using nlohmann::ordered_json;

CharacterLabelRegistry CharacterLabelRegistry::from_json(const ordered_json& document) {
  if (!document.is_object()) throw InvalidInputError("registry must be a JSON object of series");
  CharacterLabelRegistry registry;
  for (const auto& [series, characters] : document.items()) {
    if (!characters.is_object())
      throw InvalidInputError("registry series '" + series + "' must map names to prompts");
    if (characters.empty()) throw InvalidInputError("registry series '" + series + "' has no characters");
    for (const auto& [name, prompt] : characters.items()) {
      if (!prompt.is_string())
        throw InvalidInputError("registry prompt for '" + series + "/" + name + "' must be a string");
      registry.add(series, name, prompt.get<std::string>());
    }
  }
  return registry;
}

CharacterLabelRegistry CharacterLabelRegistry::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("registry file not found: " + path.string());
  try {
    return from_json(ordered_json::parse(in));
  } catch (const ordered_json::parse_error& e) {
    throw InvalidInputError("registry " + path.string() + " is not valid JSON: " + e.what());
  }
}

CharacterLabelRegistry CharacterLabelRegistry::builtin() {
  return from_json(ordered_json::parse(detail::kBuiltinRegistryJson));
}

void CharacterLabelRegistry::add(std::string_view series, std::string_view name, std::string_view prompt) {
  if (series.empty()) throw InvalidInputError("series id is empty");
  if (std::any_of(series.begin(), series.end(), [](unsigned char c) { return std::isupper(c); }))
    throw InvalidInputError("series id '" + std::string(series) + "' must be lowercase");
  if (name.empty()) throw InvalidInputError("character name is empty in series '" + std::string(series) + "'");
  if (name == kUnknownCharacter) throw InvalidInputError("'unknown' is a reserved character name");
  if (prompt.empty())
    throw InvalidInputError("prompt for '" + std::string(name) + "' in series '" + std::string(series) +
                            "' is empty");

  auto it = std::find_if(series_.begin(), series_.end(), [&](const auto& s) { return s.first == series; });
  if (it == series_.end()) {
    series_.emplace_back(std::string(series), std::vector<CandidateLabel>{});
    it = std::prev(series_.end());
  }
  auto& labels = it->second;
  if (std::any_of(labels.begin(), labels.end(), [&](const CandidateLabel& l) { return l.name == name; }))
    throw InvalidInputError("duplicate character '" + std::string(name) + "' in series '" + std::string(series) + "'");
  labels.push_back({std::string(name), std::string(prompt)});
}

bool CharacterLabelRegistry::has_series(std::string_view series) const noexcept {
  return std::any_of(series_.begin(), series_.end(), [&](const auto& s) { return s.first == series; });
}

std::vector<std::string> CharacterLabelRegistry::series() const {
  std::vector<std::string> out;
  for (const auto& s : series_) out.push_back(s.first);
  return out;
}

std::span<const CandidateLabel> CharacterLabelRegistry::labels(std::string_view series) const {
  const auto it = std::find_if(series_.begin(), series_.end(), [&](const auto& s) { return s.first == series; });
  if (it == series_.end()) throw NotFoundError("series '" + std::string(series) + "' not found in registry");
  return it->second;
}

ordered_json CharacterLabelRegistry::to_json() const {
  ordered_json out = ordered_json::object();
  for (const auto& [series, labels] : series_) {
    ordered_json characters = ordered_json::object();
    for (const auto& l : labels) characters[l.name] = l.prompt;
    out[series] = std::move(characters);
  }
  return out;
}

std::vector<CandidateLabel> candidate_labels(const CharacterLabelRegistry& registry, std::string_view series) {
  const auto labels = registry.labels(series);
  return {labels.begin(), labels.end()};
}

std::vector<IdentifiedCharacter> identify_characters(std::span<const CharacterCrop> crops,
                                                     std::string_view series, Transport& classifier,
                                                     const CharacterLabelRegistry& registry,
                                                     const IdentifyOptions& options) {
  const auto candidates = candidate_labels(registry, series);
  std::vector<IdentifiedCharacter> results(crops.size());
  std::vector<std::exception_ptr> errors(crops.size());

  auto classify_one = [&](std::size_t i) {
    try {
      const auto scores = classify(crops[i].image, candidates, classifier);
      auto& out = results[i];
      out.box = crops[i].box;
      out.score = scores.front().score;
      out.name = out.score >= options.min_score ? scores.front().name : kUnknownCharacter;
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  const auto workers = static_cast<std::size_t>(std::max(1, options.jobs));
  if (workers == 1 || crops.size() < 2) {
    for (std::size_t i = 0; i < crops.size(); ++i) classify_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(workers, crops.size()); ++w) {
      pool.emplace_back([&] {
        for (auto i = next++; i < crops.size(); i = next++) classify_one(i);
      });
    }
  }

  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const BackendError& e) {
      throw CropBackendError(i, e);
    }
  }
  return results;
}

std::vector<std::string> dedupe_names(std::span<const std::string> names) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& n : names)
    if (seen.insert(n).second) out.push_back(n);
  return out;
}

}  // namespace comicpipe
