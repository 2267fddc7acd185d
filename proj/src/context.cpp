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

#include "comicpipe/context.hpp"

#include <unordered_set>

#include "json.hpp"

#include "comicpipe/errors.hpp"
#include "comicpipe/identity.hpp"

namespace comicpipe {

using nlohmann::ordered_json;

namespace {

std::string panel_key(std::size_t index) { return "panel " + std::to_string(index + 1); }

std::string quoted(const std::string& text) {
  return ordered_json(text).dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

void append_list(std::string& out, const std::vector<std::string>& items) {
  out += '[';
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += quoted(items[i]);
  }
  out += ']';
}

std::vector<std::string> string_list(const ordered_json& value, const std::string& where) {
  if (!value.is_array()) throw InvalidInputError(where + " must be an array");
  std::vector<std::string> out;
  for (const auto& item : value) {
    if (!item.is_string()) throw InvalidInputError(where + " must contain only strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

void require_valid(const ComicContext& context) {
  for (std::size_t i = 0; i < context.panels.size(); ++i) {
    const auto& p = context.panels[i];
    if (p.key != panel_key(i))
      throw InvalidInputError("context key '" + p.key + "' should be '" + panel_key(i) + "'");
    std::unordered_set<std::string> seen;
    for (const auto& name : p.characters)
      if (!seen.insert(name).second) throw InvalidInputError(p.key + " lists '" + name + "' twice");
  }
}

ComicContext build_context(std::span<const Panel> panels) {
  ComicContext context;
  context.panels.reserve(panels.size());
  for (std::size_t i = 0; i < panels.size(); ++i) {
    context.panels.push_back({panel_key(i), dedupe_names(panels[i].characters), panels[i].texts});
  }
  return context;
}

std::string serialize_context(const ComicContext& context) {
  require_valid(context);
  std::string out = "{";
  for (std::size_t i = 0; i < context.panels.size(); ++i) {
    const auto& p = context.panels[i];
    if (i) out += ", ";
    out += quoted(p.key);
    out += ": {\"characters\": ";
    append_list(out, p.characters);
    out += ", \"texts\": ";
    append_list(out, p.texts);
    out += '}';
  }
  out += '}';
  return out;
}

ComicContext parse_context(std::string_view json_text) {
  ordered_json document;
  try {
    document = ordered_json::parse(json_text);
  } catch (const ordered_json::parse_error& e) {
    throw InvalidInputError(std::string("context is not valid JSON: ") + e.what());
  }
  if (!document.is_object()) throw InvalidInputError("context must be a JSON object");

  ComicContext context;
  for (const auto& [key, panel] : document.items()) {
    if (!panel.is_object() || !panel.contains("characters") || !panel.contains("texts"))
      throw InvalidInputError(key + " must hold 'characters' and 'texts'");
    context.panels.push_back(
        {key, string_list(panel["characters"], key + ".characters"), string_list(panel["texts"], key + ".texts")});
  }
  require_valid(context);
  return context;
}

}  // namespace comicpipe
