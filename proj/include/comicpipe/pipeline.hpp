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
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "comicpipe/backends.hpp"
#include "comicpipe/context.hpp"
#include "comicpipe/identity.hpp"
#include "comicpipe/panelizer.hpp"
#include "comicpipe/postprocess.hpp"
#include "comicpipe/prompting.hpp"
#include "comicpipe/raster.hpp"
#include "comicpipe/textflow.hpp"

namespace comicpipe {

struct PipelineConfig {
  std::map<BackendRole, BackendEndpoint> endpoints;
  DetectorConfig detector;
  PanelizerConfig panelizer;
  std::filesystem::path registry_path;  // empty: built-in registry
  TokenBudget budget;
  std::string series;
  double min_score = 0.0;
  int classify_jobs = 1;
  bool dehyphenate = false;
  std::filesystem::path prompt_file;  // empty: default prompts
  std::filesystem::path run_log;      // empty: no run log
};

// Config file layout (every key optional):
// {
//   "endpoints": {"detector": {"url": "...", "timeout_ms": 30000, "max_retries": 2,
//                              "bearer_token": "...", "record_path": "..."}, ...},
//   "detector": {"text_threshold": 0.2, "box_threshold": 0.2, "nms_iou": 0.5,
//                "max_text_area_frac": 0.8, "area_filter_all_classes": false},
//   "panelizer": {"binarize_delta": 32, "min_panel_area_frac": 0.02, "merge_iou": 0.2,
//                 "containment_frac": 0.9, "row_tolerance": 0.5},
//   "registry_path": "...", "series": "...", "min_score": 0.0, "classify_jobs": 1,
//   "budget": {"max_tokens": 4096, "chars_per_token": 4.0},
//   "dehyphenate": false, "prompt_file": "...", "run_log": "..."
// }
// Relative paths, including "mock:<path>" fixtures, resolve against base_dir.
PipelineConfig pipeline_config_from_json(const nlohmann::json& document, const std::filesystem::path& base_dir);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

// Throws InvalidInputError on out-of-range settings and NotFoundError on
// missing referenced files.
void require_valid(const PipelineConfig& config);

CharacterLabelRegistry load_registry(const PipelineConfig& config);

// Transports created on first use, one per role. Safe to share across threads.
class BackendSet {
 public:
  explicit BackendSet(const PipelineConfig& config);
  // Throws InvalidInputError when the role has no endpoint.
  Transport& get(BackendRole role);

 private:
  std::map<BackendRole, BackendEndpoint> endpoints_;
  std::mutex mutex_;
  std::map<BackendRole, std::unique_ptr<Transport>> transports_;
};

struct StripInput {
  std::string image_id;  // file stem
  ImagePayload payload;  // original file bytes
  RasterImage raster;
};

// Throws DecodeError.
StripInput load_strip(const std::filesystem::path& path);

struct TextElement {
  BoundingBox box;
  OcrResult ocr;
  std::string text;  // normalized
};

struct StripAnalysis {
  std::vector<Panel> panels;
  std::vector<Detection> raw_detections;
  std::vector<Detection> detections;  // after filter_detections
  std::vector<IdentifiedCharacter> identities;
  std::vector<TextElement> texts;
  ComicContext context;
};

// Detector request with the "text" and "character" labels, then filtering.
StripAnalysis detect_elements(const StripInput& strip, const PipelineConfig& config, BackendSet& backends);

// Full visual-cue extraction: panels, detection, assignment, identification,
// OCR and context assembly. Skips identification when identify is false.
StripAnalysis analyze_strip(const StripInput& strip, const PipelineConfig& config, BackendSet& backends,
                            const CharacterLabelRegistry& registry, bool identify = true);

struct DescribeRun {
  std::optional<ComicContext> context;  // enhanced mode only
  DescribeResult result;
};

DescribeRun describe_strip(const StripInput& strip, const PipelineConfig& config, BackendSet& backends,
                           const CharacterLabelRegistry& registry, PromptMode mode, OverflowPolicy on_overflow,
                           MllmBackend& mllm, RunLog* run_log);

}  // namespace comicpipe
