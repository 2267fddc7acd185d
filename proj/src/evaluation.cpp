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

#include "comicpipe/evaluation.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "comicpipe/errors.hpp"
#include "comicpipe/postprocess.hpp"

namespace comicpipe {

using nlohmann::json;
using nlohmann::ordered_json;

double average_precision_from_ranking(const std::vector<bool>& is_true_positive, std::size_t num_gt) {
  if (num_gt == 0) return is_true_positive.empty() ? 1.0 : 0.0;
  const auto n = is_true_positive.size();
  std::vector<double> precision(n), recall(n);
  std::size_t tp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    tp += is_true_positive[k] ? 1 : 0;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    recall[k] = static_cast<double>(tp) / static_cast<double>(num_gt);
  }
  for (std::size_t k = n; k-- > 1;) precision[k - 1] = std::max(precision[k - 1], precision[k]);

  double ap = 0.0, previous_recall = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    ap += (recall[k] - previous_recall) * precision[k];
    previous_recall = recall[k];
  }
  return ap;
}

namespace {

struct RankedPrediction {
  BoundingBox box;
  double confidence;
  std::size_t image;  // index into the per-image ground truth table
};

bool rank_less(const RankedPrediction& a, const RankedPrediction& b) {
  if (ranks_before(a.box, a.confidence, b.box, b.confidence)) return true;
  if (ranks_before(b.box, b.confidence, a.box, a.confidence)) return false;
  return a.image < b.image;
}

// Ranks predictions and greedily matches each to its image's best unmatched
// ground truth box. Returns the TP flags in rank order.
std::vector<bool> match_ranked(std::vector<RankedPrediction> preds,
                               const std::vector<std::vector<BoundingBox>>& gt_by_image, double iou_threshold) {
  std::stable_sort(preds.begin(), preds.end(), rank_less);
  std::vector<std::vector<bool>> used(gt_by_image.size());
  for (std::size_t i = 0; i < gt_by_image.size(); ++i) used[i].assign(gt_by_image[i].size(), false);

  std::vector<bool> tp;
  tp.reserve(preds.size());
  for (const auto& p : preds) {
    const auto& gts = gt_by_image[p.image];
    double best_iou = -1.0;
    std::size_t best = gts.size();
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (used[p.image][g]) continue;
      const double overlap = iou(p.box, gts[g]);
      if (overlap > best_iou) {
        best_iou = overlap;
        best = g;
      }
    }
    const bool hit = best < gts.size() && best_iou >= iou_threshold;
    if (hit) used[p.image][best] = true;
    tp.push_back(hit);
  }
  return tp;
}

void require_threshold(double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) throw InvalidInputError("iou threshold must be in (0, 1]");
}

}  // namespace

double average_precision(std::span<const BoundingBox> gt, std::span<const ScoredBox> preds, double iou_threshold) {
  require_threshold(iou_threshold);
  std::vector<std::vector<BoundingBox>> gt_by_image{std::vector<BoundingBox>(gt.begin(), gt.end())};
  std::vector<RankedPrediction> ranked;
  for (const auto& p : preds) ranked.push_back({p.box, p.confidence, 0});
  return average_precision_from_ranking(match_ranked(std::move(ranked), gt_by_image, iou_threshold), gt.size());
}

DetectionReport mean_average_precision(std::span<const GroundTruthAnnotation> annotations,
                                       std::span<const PredictionRecord> predictions, double iou_threshold) {
  require_threshold(iou_threshold);
  DetectionReport report;
  report.iou_threshold = iou_threshold;

  std::unordered_map<std::string, std::size_t> image_index;
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    if (!image_index.emplace(annotations[i].image_id, i).second)
      throw InvalidInputError("duplicate annotation for image '" + annotations[i].image_id + "'");
  }

  std::set<std::string> gt_classes;
  for (const auto& a : annotations)
    for (const auto& b : a.boxes) gt_classes.insert(b.label);

  // Predictions on images without annotations get an empty ground truth slot.
  std::size_t num_images = annotations.size();
  std::unordered_map<std::string, std::size_t> extra_images;
  std::set<std::string> warned_classes;

  for (const auto& cls : gt_classes) {
    std::vector<std::vector<BoundingBox>> gt_by_image(num_images);
    std::size_t num_gt = 0;
    for (std::size_t i = 0; i < annotations.size(); ++i) {
      for (const auto& b : annotations[i].boxes) {
        if (b.label != cls) continue;
        gt_by_image[i].push_back(b.box);
        ++num_gt;
      }
    }
    std::vector<RankedPrediction> ranked;
    for (const auto& record : predictions) {
      std::size_t image;
      if (const auto it = image_index.find(record.image_id); it != image_index.end()) {
        image = it->second;
      } else {
        auto [slot, inserted] = extra_images.emplace(record.image_id, num_images + extra_images.size());
        image = slot->second;
      }
      for (const auto& d : record.detections)
        if (d.label == cls) ranked.push_back({d.box, d.confidence, image});
    }
    gt_by_image.resize(num_images + extra_images.size());
    report.per_class_ap[cls] =
        average_precision_from_ranking(match_ranked(std::move(ranked), gt_by_image, iou_threshold), num_gt);
    report.per_class_gt[cls] = num_gt;
  }

  for (const auto& [image_id, slot] : extra_images)
    report.warnings.push_back("predictions for unannotated image '" + image_id + "' counted as false positives");
  for (const auto& record : predictions)
    for (const auto& d : record.detections)
      if (!gt_classes.count(d.label) && warned_classes.insert(d.label).second)
        report.warnings.push_back("class '" + d.label + "' has no ground truth; its predictions were ignored");
  std::sort(report.warnings.begin(), report.warnings.end());

  if (report.per_class_ap.empty()) {
    bool any_prediction = false;
    for (const auto& r : predictions) any_prediction |= !r.detections.empty();
    report.map = any_prediction ? 0.0 : 1.0;
    report.warnings.push_back("ground truth contains no boxes");
  } else {
    double sum = 0.0;
    for (const auto& [cls, ap] : report.per_class_ap) sum += ap;
    report.map = sum / static_cast<double>(report.per_class_ap.size());
  }
  return report;
}

IdentityReport weighted_prf(std::span<const std::string> gt_labels, std::span<const std::string> pred_labels) {
  if (gt_labels.size() != pred_labels.size())
    throw InvalidInputError("ground truth and prediction lists differ in length (" +
                            std::to_string(gt_labels.size()) + " vs " + std::to_string(pred_labels.size()) + ")");
  struct Counts {
    std::size_t tp = 0, fp = 0, fn = 0, support = 0;
  };
  std::map<std::string, Counts> counts;
  for (std::size_t i = 0; i < gt_labels.size(); ++i) {
    const auto& g = gt_labels[i];
    const auto& p = pred_labels[i];
    ++counts[g].support;
    if (g == p) {
      ++counts[g].tp;
    } else {
      ++counts[g].fn;
      ++counts[p].fp;
    }
  }

  IdentityReport report;
  const auto total = static_cast<double>(gt_labels.size());
  for (const auto& [cls, c] : counts) {
    ClassScores s;
    s.support = c.support;
    s.precision = c.tp + c.fp ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
    s.recall = c.tp + c.fn ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
    s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    report.per_class[cls] = s;
    if (total > 0.0) {
      const double weight = static_cast<double>(c.support) / total;
      report.precision += weight * s.precision;
      report.recall += weight * s.recall;
      report.f1 += weight * s.f1;
    }
  }
  if (total == 0.0) report.warnings.push_back("no samples to evaluate");
  return report;
}

IdentityReport evaluate_identities(std::span<const GroundTruthAnnotation> annotations,
                                   std::span<const PredictionRecord> predictions, double iou_threshold) {
  require_threshold(iou_threshold);
  std::unordered_map<std::string, const PredictionRecord*> by_image;
  for (const auto& r : predictions) by_image[r.image_id] = &r;

  std::vector<std::string> gt_labels, pred_labels;
  std::size_t unmatched = 0;
  for (const auto& a : annotations) {
    const PredictionRecord* record = nullptr;
    if (const auto it = by_image.find(a.image_id); it != by_image.end()) record = it->second;
    std::vector<bool> used(record ? record->identities.size() : 0, false);
    for (const auto& gt : a.identities) {
      std::size_t best = used.size();
      double best_iou = -1.0;
      for (std::size_t j = 0; j < used.size(); ++j) {
        if (used[j]) continue;
        const double overlap = iou(gt.box, record->identities[j].box);
        if (overlap > best_iou) {
          best_iou = overlap;
          best = j;
        }
      }
      gt_labels.push_back(gt.name);
      if (best < used.size() && best_iou >= iou_threshold) {
        used[best] = true;
        pred_labels.push_back(record->identities[best].name);
      } else {
        ++unmatched;
        pred_labels.push_back(kUnknownCharacter);
      }
    }
  }
  auto report = weighted_prf(gt_labels, pred_labels);
  if (unmatched)
    report.warnings.push_back(std::to_string(unmatched) + " ground-truth crop(s) had no matching prediction");
  return report;
}

// ---- file formats ----

namespace {

BoundingBox box_from_json(const json& value, const std::string& where) {
  if (!value.is_array() || value.size() != 4) throw InvalidInputError(where + ": box must be [x_min, y_min, x_max, y_max]");
  BoundingBox box;
  try {
    box = {value[0].get<double>(), value[1].get<double>(), value[2].get<double>(), value[3].get<double>()};
  } catch (const json::exception&) {
    throw InvalidInputError(where + ": box coordinates must be numbers");
  }
  if (!box.valid()) throw InvalidInputError(where + ": box coordinates out of order or negative");
  return box;
}

const json& array_field(const json& object, const char* field, const std::string& where) {
  static const json kEmpty = json::array();
  const auto it = object.find(field);
  if (it == object.end()) return kEmpty;
  if (!it->is_array()) throw InvalidInputError(where + ": '" + field + "' must be an array");
  return *it;
}

std::string string_field(const json& object, const char* field, const std::string& where) {
  const auto it = object.find(field);
  if (it == object.end() || !it->is_string() || it->get<std::string>().empty())
    throw InvalidInputError(where + ": '" + field + "' must be a non-empty string");
  return it->get<std::string>();
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("file not found: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInputError(path.string() + " is not valid JSON: " + e.what());
  }
}

}  // namespace

std::vector<GroundTruthAnnotation> parse_annotations(const json& document) {
  if (!document.is_array()) throw InvalidInputError("annotations must be a JSON array");
  std::vector<GroundTruthAnnotation> out;
  for (std::size_t i = 0; i < document.size(); ++i) {
    const auto& rec = document[i];
    const auto where = "annotations[" + std::to_string(i) + "]";
    if (!rec.is_object()) throw InvalidInputError(where + " must be an object");
    GroundTruthAnnotation a;
    a.image_id = string_field(rec, "image_id", where);
    a.width = rec.value("width", 0);
    a.height = rec.value("height", 0);
    auto check_bounds = [&](const BoundingBox& b, const std::string& at) {
      if (a.width > 0 && a.height > 0 && (b.x_max > a.width || b.y_max > a.height))
        throw InvalidInputError(at + ": box exceeds the image bounds");
    };
    for (const auto& b : array_field(rec, "boxes", where)) {
      const auto at = where + ".boxes";
      LabeledBox lb{box_from_json(b.value("box", json()), at), string_field(b, "label", at)};
      if (lb.label != kTextLabel && lb.label != kCharacterLabel)
        throw InvalidInputError(at + ": label must be 'text' or 'character', got '" + lb.label + "'");
      check_bounds(lb.box, at);
      a.boxes.push_back(std::move(lb));
    }
    for (const auto& b : array_field(rec, "identities", where)) {
      const auto at = where + ".identities";
      NamedBox nb{box_from_json(b.value("box", json()), at), string_field(b, "name", at)};
      check_bounds(nb.box, at);
      a.identities.push_back(std::move(nb));
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<PredictionRecord> parse_predictions(const json& document) {
  if (!document.is_array()) throw InvalidInputError("predictions must be a JSON array");
  std::vector<PredictionRecord> out;
  for (std::size_t i = 0; i < document.size(); ++i) {
    const auto& rec = document[i];
    const auto where = "predictions[" + std::to_string(i) + "]";
    if (!rec.is_object()) throw InvalidInputError(where + " must be an object");
    PredictionRecord r;
    r.image_id = string_field(rec, "image_id", where);
    for (const auto& d : array_field(rec, "detections", where)) {
      const auto at = where + ".detections";
      Detection det;
      det.box = box_from_json(d.value("box", json()), at);
      det.label = string_field(d, "label", at);
      if (!d.contains("confidence") || !d["confidence"].is_number())
        throw InvalidInputError(at + ": confidence must be a number");
      det.confidence = d["confidence"].get<double>();
      require_valid(det);
      r.detections.push_back(std::move(det));
    }
    for (const auto& d : array_field(rec, "identities", where)) {
      const auto at = where + ".identities";
      IdentifiedCharacter ic;
      ic.box = box_from_json(d.value("box", json()), at);
      ic.name = string_field(d, "name", at);
      ic.score = d.value("score", 0.0);
      r.identities.push_back(std::move(ic));
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<GroundTruthAnnotation> load_annotations(const std::filesystem::path& path) {
  return parse_annotations(read_json(path));
}

std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path) {
  return parse_predictions(read_json(path));
}

ordered_json box_to_json(const BoundingBox& box) {
  return ordered_json::array({box.x_min, box.y_min, box.x_max, box.y_max});
}

ordered_json prediction_to_json(const PredictionRecord& record) {
  ordered_json detections = ordered_json::array();
  for (const auto& d : record.detections)
    detections.push_back({{"box", box_to_json(d.box)}, {"label", d.label}, {"confidence", d.confidence}});
  ordered_json identities = ordered_json::array();
  for (const auto& c : record.identities)
    identities.push_back({{"box", box_to_json(c.box)}, {"name", c.name}, {"score", c.score}});
  return {{"image_id", record.image_id}, {"detections", detections}, {"identities", identities}};
}

ordered_json to_json(const DetectionReport& report) {
  ordered_json per_class = ordered_json::object();
  for (const auto& [cls, ap] : report.per_class_ap) per_class[cls] = ap;
  ordered_json support = ordered_json::object();
  for (const auto& [cls, n] : report.per_class_gt) support[cls] = n;
  return {{"task", "detections"},
          {"iou_threshold", report.iou_threshold},
          {"per_class_ap", per_class},
          {"per_class_support", support},
          {"map", report.map},
          {"warnings", report.warnings}};
}

ordered_json to_json(const IdentityReport& report) {
  ordered_json per_class = ordered_json::object();
  ordered_json support = ordered_json::object();
  for (const auto& [cls, s] : report.per_class) {
    per_class[cls] = {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
    support[cls] = s.support;
  }
  return {{"task", "identity"},    {"precision", report.precision}, {"recall", report.recall},
          {"f1", report.f1},       {"per_class", per_class},        {"per_class_support", support},
          {"warnings", report.warnings}};
}

std::string to_table(const DetectionReport& report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << std::left << std::setw(16) << "class" << std::right << std::setw(8) << "gt" << std::setw(10) << "AP" << '\n';
  for (const auto& [cls, ap] : report.per_class_ap) {
    out << std::left << std::setw(16) << cls << std::right << std::setw(8) << report.per_class_gt.at(cls)
        << std::setw(10) << ap << '\n';
  }
  out << std::left << std::setw(16) << "mAP" << std::right << std::setw(8) << "" << std::setw(10) << report.map << '\n';
  out << "IoU threshold " << std::setprecision(2) << report.iou_threshold << '\n';
  for (const auto& w : report.warnings) out << "warning: " << w << '\n';
  return out.str();
}

std::string to_table(const IdentityReport& report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << std::left << std::setw(20) << "class" << std::right << std::setw(10) << "precision" << std::setw(10)
      << "recall" << std::setw(10) << "f1" << std::setw(9) << "support" << '\n';
  std::size_t total = 0;
  for (const auto& [cls, s] : report.per_class) {
    out << std::left << std::setw(20) << cls << std::right << std::setw(10) << s.precision << std::setw(10) << s.recall
        << std::setw(10) << s.f1 << std::setw(9) << s.support << '\n';
    total += s.support;
  }
  out << std::left << std::setw(20) << "weighted" << std::right << std::setw(10) << report.precision << std::setw(10)
      << report.recall << std::setw(10) << report.f1 << std::setw(9) << total << '\n';
  for (const auto& w : report.warnings) out << "warning: " << w << '\n';
  return out.str();
}

}  // namespace comicpipe
