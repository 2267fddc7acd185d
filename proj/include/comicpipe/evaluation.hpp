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
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "comicpipe/geometry.hpp"
#include "comicpipe/identity.hpp"

namespace comicpipe {

struct LabeledBox {
  BoundingBox box;
  std::string label;  // "text" or "character"
};

struct NamedBox {
  BoundingBox box;
  std::string name;
};

struct GroundTruthAnnotation {
  std::string image_id;
  int width = 0;  // 0 when unknown; otherwise boxes are bounds-checked
  int height = 0;
  std::vector<LabeledBox> boxes;
  std::vector<NamedBox> identities;  // one per character crop
};

struct PredictionRecord {
  std::string image_id;
  std::vector<Detection> detections;
  std::vector<IdentifiedCharacter> identities;
};

struct ScoredBox {
  BoundingBox box;
  double confidence = 0.0;
};

// All-point interpolated AP for one class on one image. Predictions are
// ranked by confidence (ties by coordinates) and each is matched to the
// unmatched ground truth box of highest IoU when that IoU >= iou_threshold.
// 1 when both lists are empty, 0 when exactly one of them is.
double average_precision(std::span<const BoundingBox> gt, std::span<const ScoredBox> preds,
                         double iou_threshold);

// Area under the interpolated precision envelope for a ranked TP/FP sequence.
double average_precision_from_ranking(const std::vector<bool>& is_true_positive, std::size_t num_gt);

struct DetectionReport {
  double iou_threshold = 0.5;
  std::map<std::string, double> per_class_ap;
  std::map<std::string, std::size_t> per_class_gt;
  double map = 0.0;  // unweighted mean of per_class_ap
  std::vector<std::string> warnings;
};

// Per-class AP with predictions pooled over the corpus but matched only
// against ground truth of their own image.
DetectionReport mean_average_precision(std::span<const GroundTruthAnnotation> annotations,
                                       std::span<const PredictionRecord> predictions, double iou_threshold);

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct IdentityReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;  // support-weighted mean of per-class F1
  std::map<std::string, ClassScores> per_class;
  std::vector<std::string> warnings;
};

// Support-weighted precision/recall/F1 over aligned label lists.
// Throws InvalidInputError when the lengths differ.
IdentityReport weighted_prf(std::span<const std::string> gt_labels, std::span<const std::string> pred_labels);

// Aligns predicted identities to ground-truth crops by best IoU within each
// image (>= iou_threshold, each prediction used once); unmatched crops score
// as "unknown". Then weighted_prf.
IdentityReport evaluate_identities(std::span<const GroundTruthAnnotation> annotations,
                                   std::span<const PredictionRecord> predictions, double iou_threshold);

// ---- file formats ----

std::vector<GroundTruthAnnotation> parse_annotations(const nlohmann::json& document);
std::vector<PredictionRecord> parse_predictions(const nlohmann::json& document);
std::vector<GroundTruthAnnotation> load_annotations(const std::filesystem::path& path);
std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path);

nlohmann::ordered_json box_to_json(const BoundingBox& box);
nlohmann::ordered_json prediction_to_json(const PredictionRecord& record);

nlohmann::ordered_json to_json(const DetectionReport& report);
nlohmann::ordered_json to_json(const IdentityReport& report);
std::string to_table(const DetectionReport& report);
std::string to_table(const IdentityReport& report);

}  // namespace comicpipe
