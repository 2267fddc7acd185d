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

// Regenerates the mock-backend fixtures under tests/fixtures from a drawn
// stand-in strip. Golden text files in tests/fixtures/dilbert are inputs here,
// never outputs.
//
//   comicpipe_fixture_builder <tests/fixtures>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "comicpipe/backends.hpp"
#include "comicpipe/identity.hpp"
#include "comicpipe/prompting.hpp"
#include "comicpipe/raster.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace comicpipe;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string chomp(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << doc.dump(2) << '\n';
}

void ellipse(RasterImage& img, double cx, double cy, double rx, double ry, std::uint8_t v, bool ring = false) {
  for (int y = static_cast<int>(cy - ry) - 1; y <= static_cast<int>(cy + ry) + 1; ++y)
    for (int x = static_cast<int>(cx - rx) - 1; x <= static_cast<int>(cx + rx) + 1; ++x) {
      const double dx = (x + 0.5 - cx) / rx, dy = (y + 0.5 - cy) / ry, d = dx * dx + dy * dy;
      if (d <= 1.0 && (!ring || d >= 0.85))
        for (int c = 0; c < img.channels(); ++c) img.at(x, y, c) = v;
    }
}

void frame(RasterImage& img, const BoundingBox& r, double t) {
  img.fill_rect({r.x_min, r.y_min, r.x_max, r.y_min + t}, 0);
  img.fill_rect({r.x_min, r.y_max - t, r.x_max, r.y_max}, 0);
  img.fill_rect({r.x_min, r.y_min, r.x_min + t, r.y_max}, 0);
  img.fill_rect({r.x_max - t, r.y_min, r.x_max, r.y_max}, 0);
}

// Two figure styles so the crops of different characters never share bytes.
void figure(RasterImage& img, const BoundingBox& b, bool spiky) {
  const double cx = b.center_x();
  ellipse(img, cx, b.y_min + 32, 26, 28, 90);
  img.fill_rect({cx - 30, b.y_min + 62, cx + 30, b.y_max - 6}, spiky ? 150 : 110);
  if (spiky) {
    img.fill_rect({cx - 26, b.y_min + 2, cx - 18, b.y_min + 14}, 20);
    img.fill_rect({cx + 18, b.y_min + 2, cx + 26, b.y_min + 14}, 20);
  } else {
    img.fill_rect({cx - 3, b.y_min + 64, cx + 3, b.y_min + 110}, 30);  // tie
  }
}

void balloon(RasterImage& img, const BoundingBox& b, int lines) {
  ellipse(img, b.center_x(), b.center_y(), b.width() / 2 - 1, b.height() / 2 - 1, 0, true);
  const double step = b.height() / (lines + 1);
  for (int i = 1; i <= lines; ++i) {
    const double y = b.y_min + i * step;
    img.fill_rect({b.x_min + b.width() * 0.25, y - 1, b.x_max - b.width() * 0.25, y + 2}, 40);
  }
}

json box(const BoundingBox& b) { return json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

class Fixtures {
 public:
  void add(std::string_view route, const json& body, const json& response) {
    const auto fp = request_fingerprint(route, body);
    for (const auto& e : file_.entries())
      if (e.fingerprint == fp && e.response != response)
        throw std::runtime_error("conflicting fixture responses for one request on " + std::string(route));
    file_.add(route, body, response);
  }
  void save(const fs::path& path) const { file_.save(path); }

 private:
  FixtureFile file_;
};

json image_body(const ImagePayload& p) { return {{"image_b64", base64_encode(p.bytes)}}; }

json scores(const std::vector<CandidateLabel>& candidates, const std::string& top, double top_score) {
  json list = json::array();
  const double rest = (1.0 - top_score) / static_cast<double>(candidates.size() - 1);
  std::size_t k = 0;
  for (const auto& c : candidates) {
    double s = c.name == top ? top_score : std::round((rest * (1.0 + 0.1 * static_cast<double>(k++))) * 1e4) / 1e4;
    list.push_back({{"name", c.name}, {"score", s}});
  }
  return {{"scores", list}};
}

struct Element {
  BoundingBox box;
  std::string label;
  double confidence;
  std::string name;                // character identity
  std::vector<std::string> lines;  // text content
  int bars = 0;
};

void build_dilbert(const fs::path& dir) {
  const auto golden_context = chomp(read_text(dir / "context.golden.json"));
  const auto case1 = chomp(read_text(dir / "description.base.golden.txt"));
  const auto case2 = chomp(read_text(dir / "description.enhanced.golden.txt"));

  RasterImage strip(900, 300, 1, 255);
  const std::vector<BoundingBox> panels = {{10, 10, 290, 290}, {310, 10, 590, 290}, {610, 10, 890, 290}};
  for (const auto& p : panels) frame(strip, p, 3);

  const std::vector<Element> elements = {
      {{20, 18, 280, 92}, "text", 0.61, "", {"PERFORMANCE REVIEWS ARE UNFAIR TO", "UNDERPERFORMING EMPLOYEES SUCH AS MYSELF."}, 2},
      {{30, 110, 130, 284}, "character", 0.74, "wally", {}, 0},
      {{170, 110, 270, 284}, "character", 0.69, "the boss", {}, 0},
      {{318, 18, 582, 104}, "text", 0.58,  "",
       {"I MEAN, WHO GETS TO DECIDE", "WHICH TYPES OF ABLENESS THE COMPANY WILL", "ACCOMMODATE AND WHICH ONES THEY WILL PUNISH?"}, 3},
      {{400, 112, 500, 284}, "character", 0.77, "wally", {}, 0},
      {{622, 18, 722, 52}, "text", 0.44, "", {"I DO"}, 1},
      {{712, 58, 882, 116}, "text", 0.52, "", {"IT ALL SEEMS", "SO ARBI-", "TRARY."}, 3},
      {{630, 124, 730, 284}, "character", 0.66, "the boss", {}, 0},
      {{760, 124, 860, 284}, "character", 0.71, "wally", {}, 0},
  };
  for (const auto& e : elements) {
    if (e.label == "character") figure(strip, e.box, e.name == "the boss");
    else balloon(strip, e.box, e.bars);
  }
  const auto strip_payload = to_payload(strip);
  write_bytes(dir / "strip.png", strip_payload.bytes);

  // Detector: one request for the whole strip. Listed in confidence order.
  Fixtures detector;
  json detections = json::array();
  std::vector<const Element*> by_conf;
  for (const auto& e : elements) by_conf.push_back(&e);
  std::stable_sort(by_conf.begin(), by_conf.end(), [](auto* a, auto* b) { return a->confidence > b->confidence; });
  for (const auto* e : by_conf) detections.push_back({{"box", box(e->box)}, {"label", e->label}, {"confidence", e->confidence}});
  json detect_body = image_body(strip_payload);
  detect_body["labels"] = {"text", "character"};
  detect_body["text_threshold"] = 0.2;
  detect_body["box_threshold"] = 0.2;
  detector.add("/v1/detect", detect_body, {{"detections", detections}});
  detector.save(dir / "detector.json");

  // Classifier and OCR: one entry per crop.
  const auto candidates = candidate_labels(CharacterLabelRegistry::builtin(), "dilbert");
  json cand_json = json::array();
  for (const auto& c : candidates) cand_json.push_back({{"name", c.name}, {"prompt", c.prompt}});
  Fixtures classifier, ocr;
  for (const auto& e : elements) {
    const auto crop = to_payload(strip.crop(e.box));
    auto body = image_body(crop);
    if (e.label == "character") {
      body["candidates"] = cand_json;
      classifier.add("/v1/classify", body, scores(candidates, e.name, e.name == "wally" ? 0.83 : 0.79));
    } else {
      // Lines listed bottom-up on purpose; the client sorts them.
      json lines = json::array();
      const double h = e.box.height() / static_cast<double>(e.lines.size() + 1);
      for (std::size_t i = e.lines.size(); i-- > 0;) {
        const double y = h * static_cast<double>(i + 1);
        lines.push_back({{"text", e.lines[i]}, {"box", json::array({e.box.width() * 0.2, y - 6, e.box.width() * 0.8, y + 6})}});
      }
      ocr.add("/v1/ocr", body, {{"lines", lines}});
    }
  }
  classifier.save(dir / "classifier.json");
  ocr.save(dir / "ocr.json");

  // Generation: the base prompt and the enhanced prompt built from the golden context.
  Fixtures mllm;
  PromptBundle base;
  auto gen_body = image_body(strip_payload);
  gen_body["prompt"] = render_prompt(base);
  mllm.add("/v1/generate", gen_body, {{"text", case1}});
  PromptBundle enhanced;
  enhanced.mode = PromptMode::enhanced;
  enhanced.context_json = golden_context;
  gen_body["prompt"] = render_prompt(enhanced);
  mllm.add("/v1/generate", gen_body, {{"text", case2}});
  mllm.save(dir / "mllm.json");

  write_json(dir / "config.json", {{"endpoints",
                                    {{"detector", "mock:detector.json"},
                                     {"classifier", "mock:classifier.json"},
                                     {"ocr", "mock:ocr.json"},
                                     {"mllm", "mock:mllm.json"}}},
                                   {"series", "dilbert"}});

  // Hand annotation for the evaluation commands.
  json boxes = json::array(), identities = json::array();
  for (const auto& e : elements) {
    boxes.push_back({{"box", box(e.box)}, {"label", e.label}});
    if (e.label == "character") identities.push_back({{"box", box(e.box)}, {"name", e.name}});
  }
  write_json(dir / "annotations.json", json::array({{{"image_id", "strip"},
                                                     {"width", 900},
                                                     {"height", 300},
                                                     {"boxes", boxes},
                                                     {"identities", identities}}}));
}

void build_garfield(const fs::path& dir) {
  fs::create_directories(dir);
  RasterImage crop(120, 140, 3, 255);
  ellipse(crop, 60, 80, 50, 55, 170);
  ellipse(crop, 60, 40, 30, 28, 200);
  for (int y = 0; y < crop.height(); ++y)
    for (int x = 0; x < crop.width(); ++x)
      if (crop.at(x, y, 0) != 255) crop.at(x, y, 2) = 30;  // orange-ish
  const auto payload = to_payload(crop);
  write_bytes(dir / "crop.png", payload.bytes);
  const auto candidates = candidate_labels(CharacterLabelRegistry::builtin(), "garfield");
  json cand_json = json::array();
  for (const auto& c : candidates) cand_json.push_back({{"name", c.name}, {"prompt", c.prompt}});
  Fixtures classifier;
  auto body = image_body(payload);
  body["candidates"] = cand_json;
  classifier.add("/v1/classify", body, scores(candidates, "garfield", 0.92));
  classifier.save(dir / "classifier.json");
}

void build_blank(const fs::path& dir) {
  fs::create_directories(dir);
  const auto payload = to_payload(RasterImage(64, 48, 3, 255));
  write_bytes(dir / "crop.png", payload.bytes);
  Fixtures ocr;
  ocr.add("/v1/ocr", image_body(payload), {{"lines", json::array()}});
  ocr.save(dir / "ocr.json");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: comicpipe_fixture_builder <fixtures-dir>\n";
    return 1;
  }
  try {
    const fs::path root = argv[1];
    build_dilbert(root / "dilbert");
    build_garfield(root / "garfield");
    build_blank(root / "blank");
  } catch (const std::exception& e) {
    std::cerr << "fixture builder: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
