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

#include "comicpipe/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>
#include <unistd.h>

#include "json.hpp"

#include "comicpipe/errors.hpp"
#include "comicpipe/evaluation.hpp"
#include "comicpipe/pipeline.hpp"
#include "comicpipe/synthetic.hpp"
#include "comicpipe/version.hpp"

namespace comicpipe {

using nlohmann::ordered_json;

namespace {

namespace fs = std::filesystem;

// Flags shared by the image commands. Unset optionals keep the config value.
struct CommonOptions {
  std::string image;
  std::string config_path;
  std::string series;
  std::string registry;
  std::optional<double> min_area_frac;
  std::optional<int> binarize_delta;
  std::optional<double> merge_iou;
  std::optional<double> row_tolerance;
  bool dehyphenate = false;
};

struct DescribeOptionsCli {
  std::string mode = "enhanced";
  std::string on_overflow;
  std::string context_out;
  std::string run_log;
  std::string prompt_file;
  std::optional<long> max_tokens;
  std::string input_dir;
  std::string out_dir;
  int jobs = 1;
};

struct EvalOptions {
  std::string task;
  std::string gt;
  std::string pred;
  double iou = 0.5;
  std::string format = "json";
};

struct SyntheticOptions {
  std::string out;
  std::size_t count = 100;
  std::uint64_t seed = 7;
};

void add_config_options(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "Pipeline config JSON (default: $COMICPIPE_CONFIG or ./comicpipe.json)");
}

PipelineConfig resolve_config(const CommonOptions& o) {
  PipelineConfig config;
  fs::path path;
  if (!o.config_path.empty()) {
    path = o.config_path;
  } else if (const char* env = std::getenv("COMICPIPE_CONFIG"); env && *env) {
    path = env;
  } else if (fs::exists("comicpipe.json")) {
    path = "comicpipe.json";
  }
  if (!path.empty()) config = load_pipeline_config(path);

  if (!o.series.empty()) config.series = o.series;
  if (!o.registry.empty()) config.registry_path = o.registry;
  if (o.min_area_frac) config.panelizer.min_panel_area_frac = *o.min_area_frac;
  if (o.binarize_delta) config.panelizer.binarize_delta = *o.binarize_delta;
  if (o.merge_iou) config.panelizer.merge_iou = *o.merge_iou;
  if (o.row_tolerance) config.panelizer.row_tolerance = *o.row_tolerance;
  if (o.dehyphenate) config.dehyphenate = true;
  return config;
}

ordered_json number(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 9.0e15) return static_cast<long long>(v);
  return v;
}

ordered_json box_json(const BoundingBox& b) {
  return ordered_json::array({number(b.x_min), number(b.y_min), number(b.x_max), number(b.y_max)});
}

std::string dump(const ordered_json& j) {
  return j.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." +
         std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInputError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw InvalidInputError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

ordered_json detections_json(const std::vector<Detection>& detections) {
  ordered_json out = ordered_json::array();
  for (const auto& d : detections)
    out.push_back({{"box", box_json(d.box)}, {"label", d.label}, {"confidence", d.confidence}});
  return out;
}

// ---- commands ----

int cmd_panels(const CommonOptions& o, std::ostream& out) {
  auto config = resolve_config(o);
  require_valid(config.panelizer);
  const auto image = load_image(o.image);
  ordered_json panels = ordered_json::array();
  for (const auto& b : reading_order(extract_panels(image, config.panelizer), config.panelizer.row_tolerance))
    panels.push_back(box_json(b));
  out << dump({{"panels", panels}}) << '\n';
  return kExitOk;
}

int cmd_detect(const CommonOptions& o, bool raw, std::ostream& out) {
  const auto config = resolve_config(o);
  require_valid(config);
  const auto strip = load_strip(o.image);
  BackendSet backends(config);
  const auto analysis = detect_elements(strip, config, backends);
  out << dump({{"image_id", strip.image_id},
               {"detections", detections_json(raw ? analysis.raw_detections : analysis.detections)}})
      << '\n';
  return kExitOk;
}

int cmd_identify(const CommonOptions& o, std::ostream& out) {
  const auto config = resolve_config(o);
  require_valid(config);
  const auto registry = load_registry(config);
  registry.labels(config.series);
  const auto strip = load_strip(o.image);
  BackendSet backends(config);

  auto analysis = detect_elements(strip, config, backends);
  std::vector<CharacterCrop> crops;
  for (const auto& d : analysis.detections)
    if (d.label == kCharacterLabel && d.box.area() > 0.0)
      crops.push_back({d.box, to_payload(strip.raster.crop(d.box))});
  const auto identities = identify_characters(crops, config.series, backends.get(BackendRole::classifier), registry,
                                              {config.min_score, config.classify_jobs});
  PredictionRecord record{strip.image_id, analysis.detections, identities};
  out << dump(prediction_to_json(record)) << '\n';
  return kExitOk;
}

int cmd_ocr(const CommonOptions& o, std::ostream& out) {
  const auto config = resolve_config(o);
  require_valid(config);
  const auto strip = load_strip(o.image);
  BackendSet backends(config);
  const auto analysis = analyze_strip(strip, config, backends, CharacterLabelRegistry{}, false);
  ordered_json texts = ordered_json::array();
  for (const auto& t : analysis.texts) {
    ordered_json lines = ordered_json::array();
    for (const auto& l : t.ocr.lines) lines.push_back({{"text", l.text}, {"box", box_json(l.box)}});
    texts.push_back({{"box", box_json(t.box)}, {"lines", lines}, {"text", t.text}});
  }
  out << dump({{"image_id", strip.image_id}, {"texts", texts}}) << '\n';
  return kExitOk;
}

int cmd_context(const CommonOptions& o, const std::string& out_path, std::ostream& out) {
  const auto config = resolve_config(o);
  require_valid(config);
  const auto registry = load_registry(config);
  const auto strip = load_strip(o.image);
  BackendSet backends(config);
  const auto analysis = analyze_strip(strip, config, backends, registry);
  const auto text = serialize_context(analysis.context) + "\n";
  if (out_path.empty()) {
    out << text;
  } else {
    write_atomic(out_path, text);
  }
  return kExitOk;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const OverflowError*>(&e)) return kExitOverflow;
  if (dynamic_cast<const DecodeError*>(&e)) return kExitDecode;
  if (dynamic_cast<const BackendError*>(&e)) return kExitBackend;
  return kExitError;
}

bool is_image_file(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

int cmd_describe(const CommonOptions& o, const DescribeOptionsCli& d, std::ostream& out, std::ostream& err) {
  auto config = resolve_config(o);
  if (d.max_tokens) config.budget.max_tokens = *d.max_tokens;
  if (!d.prompt_file.empty()) config.prompt_file = d.prompt_file;
  if (!d.run_log.empty()) config.run_log = d.run_log;
  require_valid(config);

  const auto mode = parse_prompt_mode(d.mode);
  const auto policy = d.on_overflow.empty() ? OverflowPolicy::fail : parse_overflow_policy(d.on_overflow);
  const auto registry = load_registry(config);
  if (mode == PromptMode::enhanced) registry.labels(config.series);

  BackendSet backends(config);
  MllmBackend mllm(backends.get(BackendRole::mllm));

  if (d.input_dir.empty()) {
    if (o.image.empty()) throw InvalidInputError("describe needs an image path or --input-dir");
    std::optional<RunLog> run_log;
    run_log.emplace(config.run_log.empty() ? fs::path("comicpipe.runlog.jsonl") : config.run_log);
    const auto strip = load_strip(o.image);
    const auto run = describe_strip(strip, config, backends, registry, mode, policy, mllm, &*run_log);
    if (run.context && !d.context_out.empty()) write_atomic(d.context_out, serialize_context(*run.context) + "\n");
    out << run.result.text << '\n';
    return kExitOk;
  }

  if (d.out_dir.empty()) throw InvalidInputError("--input-dir needs --out-dir");
  std::vector<fs::path> images;
  for (const auto& entry : fs::directory_iterator(d.input_dir))
    if (entry.is_regular_file() && is_image_file(entry.path())) images.push_back(entry.path());
  std::sort(images.begin(), images.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  fs::create_directories(d.out_dir);
  RunLog run_log(config.run_log.empty() ? fs::path(d.out_dir) / "run_log.jsonl" : config.run_log);

  std::vector<int> codes(images.size(), kExitOk);
  std::vector<std::string> messages(images.size());
  std::vector<std::optional<RunRecord>> records(images.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (auto i = next++; i < images.size(); i = next++) {
      try {
        const auto strip = load_strip(images[i]);
        // Logged after the pool joins so the file follows input order.
        const auto run = describe_strip(strip, config, backends, registry, mode, policy, mllm, nullptr);
        records[i] = RunRecord{strip.image_id, run.result.mode_sent, sha256_hex(run.result.prompt),
                               run.result.budget.estimated_tokens, run.result.text, run_timestamp()};
        const auto stem = fs::path(d.out_dir) / strip.image_id;
        if (run.context) write_atomic(stem.string() + ".context.json", serialize_context(*run.context) + "\n");
        write_atomic(stem.string() + ".description.txt", run.result.text + "\n");
        messages[i] = "ok";
      } catch (const std::exception& e) {
        codes[i] = exit_code_for(e);
        messages[i] = std::string("error: ") + e.what();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, d.jobs)), std::max<std::size_t>(1, images.size()));
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  }

  for (const auto& r : records)
    if (r) run_log.append(*r);

  int code = kExitOk;
  for (std::size_t i = 0; i < images.size(); ++i) {
    out << images[i].stem().string() << '\t' << messages[i] << '\n';
    if (codes[i] != kExitOk) {
      err << images[i].filename().string() << ": " << messages[i] << '\n';
      if (code == kExitOk) code = codes[i];
    }
  }
  return code;
}

int cmd_eval(const EvalOptions& e, std::ostream& out) {
  auto predictions_doc = [&] {
    std::ifstream in(e.pred);
    if (!in) throw NotFoundError("predictions file not found: " + e.pred);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& ex) {
      throw InvalidInputError(e.pred + " is not valid JSON: " + ex.what());
    }
    // A single `detect`/`identify` dump is accepted as a one-image corpus.
    if (doc.is_object()) doc = nlohmann::json::array({doc});
    return doc;
  }();
  const auto annotations = load_annotations(e.gt);
  const auto predictions = parse_predictions(predictions_doc);

  if (e.task == "detections") {
    const auto report = mean_average_precision(annotations, predictions, e.iou);
    out << (e.format == "table" ? to_table(report) : dump(to_json(report)) + "\n");
  } else {
    const auto report = evaluate_identities(annotations, predictions, e.iou);
    out << (e.format == "table" ? to_table(report) : dump(to_json(report)) + "\n");
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"comicpipe: visual cues and accessible descriptions for comic strips", "comicpipe"};
  app.set_version_flag("--version", std::string("comicpipe ") + kVersion);
  app.require_subcommand(1);

  CommonOptions common;
  DescribeOptionsCli describe_opts;
  EvalOptions eval_opts;
  SyntheticOptions synth;
  std::string context_out_path;
  bool raw = false;

  auto add_image = [&](CLI::App* cmd, bool required = true) {
    auto* opt = cmd->add_option("image", common.image, "PNG or JPEG comic strip");
    if (required) opt->required();
  };
  auto add_series = [&](CLI::App* cmd) {
    cmd->add_option("--series", common.series, "Series id in the character registry (e.g. dilbert)");
    cmd->add_option("--registry", common.registry, "Character registry JSON (default: built-in)");
  };
  auto add_panelizer = [&](CLI::App* cmd) {
    cmd->add_option("--min-area-frac", common.min_area_frac, "Smallest panel, as a fraction of the image area");
    cmd->add_option("--binarize-delta", common.binarize_delta, "Foreground threshold against the background");
    cmd->add_option("--merge-iou", common.merge_iou, "IoU above which panel boxes merge");
    cmd->add_option("--row-tolerance", common.row_tolerance, "Row clustering tolerance (x median height)");
  };

  auto* panels = app.add_subcommand("panels", "Segment panels and print their boxes in reading order");
  add_image(panels);
  add_config_options(panels, common);
  add_panelizer(panels);

  auto* detect_cmd = app.add_subcommand("detect", "Detect text and character boxes");
  add_image(detect_cmd);
  add_config_options(detect_cmd, common);
  detect_cmd->add_flag("--raw", raw, "Print detector output before filtering");

  auto* identify_cmd = app.add_subcommand("identify", "Detect and identify characters");
  add_image(identify_cmd);
  add_config_options(identify_cmd, common);
  add_series(identify_cmd);

  auto* ocr_cmd = app.add_subcommand("ocr", "Detect text boxes and read them");
  add_image(ocr_cmd);
  add_config_options(ocr_cmd, common);
  add_panelizer(ocr_cmd);
  ocr_cmd->add_flag("--dehyphenate", common.dehyphenate, "Join words hyphenated across lines");

  auto* context_cmd = app.add_subcommand("context", "Build the per-panel context JSON");
  add_image(context_cmd);
  add_config_options(context_cmd, common);
  add_series(context_cmd);
  add_panelizer(context_cmd);
  context_cmd->add_flag("--dehyphenate", common.dehyphenate, "Join words hyphenated across lines");
  context_cmd->add_option("--out", context_out_path, "Write the context here instead of stdout");

  auto* describe_cmd = app.add_subcommand("describe", "Generate a description with the multimodal model");
  add_image(describe_cmd, false);
  add_config_options(describe_cmd, common);
  add_series(describe_cmd);
  add_panelizer(describe_cmd);
  describe_cmd->add_flag("--dehyphenate", common.dehyphenate, "Join words hyphenated across lines");
  describe_cmd->add_option("--mode", describe_opts.mode, "base or enhanced")
      ->check(CLI::IsMember({"base", "enhanced"}));
  describe_cmd->add_option("--on-overflow", describe_opts.on_overflow, "fail, send or degrade (default fail)")
      ->check(CLI::IsMember({"fail", "send", "degrade"}));
  describe_cmd->add_option("--context-out", describe_opts.context_out, "Write the context JSON here");
  describe_cmd->add_option("--run-log", describe_opts.run_log, "JSON-lines run log");
  describe_cmd->add_option("--prompt-file", describe_opts.prompt_file, "JSON overriding the base prompt/connector");
  describe_cmd->add_option("--max-tokens", describe_opts.max_tokens, "Token budget for the prompt");
  describe_cmd->add_option("--input-dir", describe_opts.input_dir, "Describe every PNG/JPEG in this directory");
  describe_cmd->add_option("--out-dir", describe_opts.out_dir, "Output directory for --input-dir");
  describe_cmd->add_option("--jobs", describe_opts.jobs, "Images processed in parallel")->check(CLI::PositiveNumber);

  auto* eval_cmd = app.add_subcommand("eval", "Score detections (mAP) or identities (weighted P/R/F1)");
  eval_cmd->add_option("task", eval_opts.task, "detections or identity")
      ->required()
      ->check(CLI::IsMember({"detections", "identity"}));
  eval_cmd->add_option("--gt", eval_opts.gt, "annotations.json")->required();
  eval_cmd->add_option("--pred", eval_opts.pred, "predictions.json")->required();
  eval_cmd->add_option("--iou", eval_opts.iou, "IoU threshold")->capture_default_str();
  eval_cmd->add_option("--format", eval_opts.format, "json or table")->check(CLI::IsMember({"json", "table"}));

  auto* synth_cmd = app.add_subcommand("gen-synthetic", "Write the synthetic panel corpus with ground truth");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--count", synth.count, "Number of images")->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*panels) return cmd_panels(common, out);
    if (*detect_cmd) return cmd_detect(common, raw, out);
    if (*identify_cmd) return cmd_identify(common, out);
    if (*ocr_cmd) return cmd_ocr(common, out);
    if (*context_cmd) return cmd_context(common, context_out_path, out);
    if (*describe_cmd) return cmd_describe(common, describe_opts, out, err);
    if (*eval_cmd) return cmd_eval(eval_opts, out);
    if (*synth_cmd) {
      write_synthetic_corpus(synth.out, synth.count, synth.seed);
      return kExitOk;
    }
  } catch (const std::exception& e) {
    err << "comicpipe: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kExitError;
}

}  // namespace comicpipe
