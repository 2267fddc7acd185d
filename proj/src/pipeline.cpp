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

#include "comicpipe/pipeline.hpp"

#include <fstream>

#include "comicpipe/errors.hpp"
#include "comicpipe/log.hpp"

namespace comicpipe {

using nlohmann::json;

namespace {

template <typename T>
void read_field(const json& object, const char* key, T& target, const std::string& where) {
  const auto it = object.find(key);
  if (it == object.end() || it->is_null()) return;
  try {
    target = it->get<T>();
  } catch (const json::exception&) {
    throw InvalidInputError("config " + where + "." + key + " has the wrong type");
  }
}

std::filesystem::path resolve(const std::filesystem::path& base_dir, const std::string& value) {
  if (value.empty()) return {};
  std::filesystem::path p(value);
  return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

const json& section(const json& document, const char* key) {
  static const json kEmpty = json::object();
  const auto it = document.find(key);
  if (it == document.end() || it->is_null()) return kEmpty;
  if (!it->is_object()) throw InvalidInputError(std::string("config '") + key + "' must be an object");
  return *it;
}

}  // namespace

PipelineConfig pipeline_config_from_json(const json& document, const std::filesystem::path& base_dir) {
  if (!document.is_object()) throw InvalidInputError("config must be a JSON object");
  PipelineConfig config;

  for (const auto& [role_name, value] : section(document, "endpoints").items()) {
    BackendEndpoint endpoint;
    endpoint.role = parse_role(role_name);
    if (value.is_string()) {
      endpoint.url = value.get<std::string>();
    } else if (value.is_object()) {
      const auto where = "endpoints." + role_name;
      read_field(value, "url", endpoint.url, where);
      read_field(value, "timeout_ms", endpoint.timeout_ms, where);
      read_field(value, "max_retries", endpoint.max_retries, where);
      read_field(value, "bearer_token", endpoint.bearer_token, where);
      std::string record;
      read_field(value, "record_path", record, where);
      endpoint.record_path = resolve(base_dir, record);
    } else {
      throw InvalidInputError("config endpoints." + role_name + " must be a url string or an object");
    }
    if (endpoint.url.starts_with("mock:") && endpoint.url != "mock:echo") {
      endpoint.url = "mock:" + resolve(base_dir, endpoint.url.substr(5)).string();
    }
    config.endpoints[endpoint.role] = std::move(endpoint);
  }

  const auto& det = section(document, "detector");
  read_field(det, "text_threshold", config.detector.text_threshold, "detector");
  read_field(det, "box_threshold", config.detector.box_threshold, "detector");
  read_field(det, "nms_iou", config.detector.nms_iou, "detector");
  read_field(det, "max_text_area_frac", config.detector.max_text_area_frac, "detector");
  read_field(det, "area_filter_all_classes", config.detector.area_filter_all_classes, "detector");

  const auto& pan = section(document, "panelizer");
  read_field(pan, "binarize_delta", config.panelizer.binarize_delta, "panelizer");
  read_field(pan, "min_panel_area_frac", config.panelizer.min_panel_area_frac, "panelizer");
  read_field(pan, "merge_iou", config.panelizer.merge_iou, "panelizer");
  read_field(pan, "containment_frac", config.panelizer.containment_frac, "panelizer");
  read_field(pan, "row_tolerance", config.panelizer.row_tolerance, "panelizer");

  const auto& budget = section(document, "budget");
  read_field(budget, "max_tokens", config.budget.max_tokens, "budget");
  read_field(budget, "chars_per_token", config.budget.chars_per_token, "budget");

  std::string registry, prompt_file, run_log;
  read_field(document, "registry_path", registry, "");
  read_field(document, "prompt_file", prompt_file, "");
  read_field(document, "run_log", run_log, "");
  config.registry_path = resolve(base_dir, registry);
  config.prompt_file = resolve(base_dir, prompt_file);
  config.run_log = resolve(base_dir, run_log);
  read_field(document, "series", config.series, "");
  read_field(document, "min_score", config.min_score, "");
  read_field(document, "classify_jobs", config.classify_jobs, "");
  read_field(document, "dehyphenate", config.dehyphenate, "");
  return config;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("config file not found: " + path.string());
  json document;
  try {
    document = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInputError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return pipeline_config_from_json(document, path.parent_path());
}

void require_valid(const PipelineConfig& config) {
  for (const auto& [role, endpoint] : config.endpoints) {
    require_valid(endpoint);
    const std::string_view url = endpoint.url;
    if (url.starts_with("mock:") && url != "mock:echo" && !std::filesystem::exists(std::string(url.substr(5))))
      throw NotFoundError("fixture for " + std::string(to_string(role)) + " not found: " + std::string(url.substr(5)));
  }
  require_valid(config.detector);
  require_valid(config.panelizer);
  require_valid(config.budget);
  if (!(config.min_score >= 0.0 && config.min_score <= 1.0)) throw InvalidInputError("min_score must be in [0, 1]");
  if (config.classify_jobs < 1) throw InvalidInputError("classify_jobs must be >= 1");
  if (!config.registry_path.empty() && !std::filesystem::exists(config.registry_path))
    throw NotFoundError("registry file not found: " + config.registry_path.string());
  if (!config.prompt_file.empty() && !std::filesystem::exists(config.prompt_file))
    throw NotFoundError("prompt file not found: " + config.prompt_file.string());
}

CharacterLabelRegistry load_registry(const PipelineConfig& config) {
  if (config.registry_path.empty()) return CharacterLabelRegistry::builtin();
  return CharacterLabelRegistry::load(config.registry_path);
}

BackendSet::BackendSet(const PipelineConfig& config) : endpoints_(config.endpoints) {}

Transport& BackendSet::get(BackendRole role) {
  std::lock_guard lock(mutex_);
  auto& slot = transports_[role];
  if (!slot) {
    const auto it = endpoints_.find(role);
    if (it == endpoints_.end())
      throw InvalidInputError("no endpoint configured for the " + std::string(to_string(role)) + " role");
    slot = make_transport(it->second);
  }
  return *slot;
}

StripInput load_strip(const std::filesystem::path& path) {
  StripInput strip;
  strip.image_id = path.stem().string();
  strip.payload.bytes = read_file_bytes(path);
  try {
    strip.raster = decode_image(strip.payload.bytes);
  } catch (const DecodeError& e) {
    throw DecodeError(path.string() + ": " + e.what());
  }
  strip.payload.width = strip.raster.width();
  strip.payload.height = strip.raster.height();
  return strip;
}

StripAnalysis detect_elements(const StripInput& strip, const PipelineConfig& config, BackendSet& backends) {
  static const std::vector<std::string> kLabels = {kTextLabel, kCharacterLabel};
  StripAnalysis analysis;
  analysis.raw_detections = detect(strip.payload, kLabels, config.detector.text_threshold,
                                   config.detector.box_threshold, backends.get(BackendRole::detector));
  analysis.detections =
      filter_detections(analysis.raw_detections, strip.raster.width(), strip.raster.height(), config.detector);
  return analysis;
}

StripAnalysis analyze_strip(const StripInput& strip, const PipelineConfig& config, BackendSet& backends,
                            const CharacterLabelRegistry& registry, bool identify) {
  if (identify) registry.labels(config.series);  // fail fast on an unknown series

  auto analysis = detect_elements(strip, config, backends);
  analysis.panels = assign_to_panels(segment_panels(strip.raster, config.panelizer), analysis.detections);

  // Crops in panel/element order so identities line up with panel positions.
  std::vector<CharacterCrop> crops;
  std::vector<std::size_t> crop_panel;
  for (const auto& panel : analysis.panels) {
    for (const auto& element : panel.elements) {
      if (!(element.box.area() > 0.0)) {
        logger()->warn("{}: skipping zero-area {} detection", strip.image_id, element.label);
        continue;
      }
      if (element.label == kCharacterLabel) {
        if (identify) {
          crops.push_back({element.box, to_payload(strip.raster.crop(element.box))});
          crop_panel.push_back(static_cast<std::size_t>(panel.index));
        }
      } else if (element.label == kTextLabel) {
        TextElement text;
        text.box = element.box;
        text.ocr = ocr(to_payload(strip.raster.crop(element.box)), backends.get(BackendRole::ocr));
        text.ocr.box = element.box;
        text.text = normalize_balloon(text.ocr, {config.dehyphenate});
        if (!text.text.empty()) analysis.panels[panel.index].texts.push_back(text.text);
        analysis.texts.push_back(std::move(text));
      }
    }
  }

  if (identify && !crops.empty()) {
    analysis.identities = identify_characters(crops, config.series, backends.get(BackendRole::classifier), registry,
                                              {config.min_score, config.classify_jobs});
    for (std::size_t i = 0; i < crops.size(); ++i)
      analysis.panels[crop_panel[i]].characters.push_back(analysis.identities[i].name);
  }
  analysis.context = build_context(analysis.panels);
  return analysis;
}

DescribeRun describe_strip(const StripInput& strip, const PipelineConfig& config, BackendSet& backends,
                           const CharacterLabelRegistry& registry, PromptMode mode, OverflowPolicy on_overflow,
                           MllmBackend& mllm, RunLog* run_log) {
  PromptBundle bundle = config.prompt_file.empty() ? PromptBundle{} : load_prompt_template(config.prompt_file);
  bundle.mode = mode;

  DescribeRun run;
  if (mode == PromptMode::enhanced) {
    run.context = analyze_strip(strip, config, backends, registry).context;
    bundle.context_json = serialize_context(*run.context);
  }
  DescribeOptions options;
  options.budget = config.budget;
  options.on_overflow = on_overflow;
  options.image_id = strip.image_id;
  options.run_log = run_log;
  run.result = describe(strip.payload, bundle, mllm, options);
  return run;
}

}  // namespace comicpipe
