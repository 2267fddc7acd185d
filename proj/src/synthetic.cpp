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

#include "comicpipe/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "json.hpp"

#include "comicpipe/errors.hpp"

namespace comicpipe {

namespace {

// std::uniform_int_distribution differs between standard libraries; plain
// modulo over mt19937_64 output keeps corpora identical everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  int uniform(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  bool coin() { return engine_() & 1u; }

 private:
  std::mt19937_64 engine_;
};

void draw_frame(RasterImage& img, const BoundingBox& r, int thickness, std::uint8_t value) {
  const double t = thickness;
  img.fill_rect({r.x_min, r.y_min, r.x_max, r.y_min + t}, value);
  img.fill_rect({r.x_min, r.y_max - t, r.x_max, r.y_max}, value);
  img.fill_rect({r.x_min, r.y_min, r.x_min + t, r.y_max}, value);
  img.fill_rect({r.x_max - t, r.y_min, r.x_max, r.y_max}, value);
}

void draw_disc(RasterImage& img, double cx, double cy, double rx, double ry, std::uint8_t value, bool outline) {
  const int x0 = static_cast<int>(std::floor(cx - rx)), x1 = static_cast<int>(std::ceil(cx + rx));
  const int y0 = static_cast<int>(std::floor(cy - ry)), y1 = static_cast<int>(std::ceil(cy + ry));
  for (int y = std::max(0, y0); y <= std::min(img.height() - 1, y1); ++y) {
    for (int x = std::max(0, x0); x <= std::min(img.width() - 1, x1); ++x) {
      const double dx = (x + 0.5 - cx) / rx, dy = (y + 0.5 - cy) / ry;
      const double d = dx * dx + dy * dy;
      const bool inside = d <= 1.0;
      const bool on_edge = inside && d >= 0.8;
      if (outline ? on_edge : inside)
        for (int c = 0; c < img.channels(); ++c) img.at(x, y, c) = value;
    }
  }
}

// Figure and balloon shapes strictly inside `inner` (never touching it).
void draw_contents(RasterImage& img, const BoundingBox& inner, std::uint8_t ink, std::uint8_t sheet, Rng& rng) {
  const double w = inner.width(), h = inner.height();
  if (w < 40 || h < 40) return;
  const int figures = rng.uniform(0, 2);
  for (int i = 0; i < figures; ++i) {
    const double rx = std::min(w, h) * rng.uniform(10, 22) / 100.0;
    const double ry = rx * rng.uniform(100, 160) / 100.0;
    if (2 * rx + 8 > w || 2 * ry + 8 > h) continue;
    const double cx = inner.x_min + 4 + rx + rng.uniform(0, static_cast<int>(w - 2 * rx - 8));
    const double cy = inner.y_min + 4 + ry + rng.uniform(0, static_cast<int>(h - 2 * ry - 8));
    draw_disc(img, cx, cy, rx, ry, static_cast<std::uint8_t>(rng.uniform(60, 160)), false);
    draw_disc(img, cx, cy - ry * 0.6, rx * 0.35, rx * 0.35, ink, false);
  }
  if (rng.coin()) {
    const double rx = w * rng.uniform(20, 35) / 100.0, ry = h * rng.uniform(10, 18) / 100.0;
    const double cx = inner.x_min + 4 + rx + rng.uniform(0, std::max(0, static_cast<int>(w - 2 * rx - 8)));
    const double cy = inner.y_min + 4 + ry;
    if (2 * rx + 8 <= w && 2 * ry + 8 <= h) {
      draw_disc(img, cx, cy, rx, ry, sheet, false);
      draw_disc(img, cx, cy, rx, ry, ink, true);
      for (int line = -1; line <= 1; ++line) {
        const double y = cy + line * ry * 0.35;
        img.fill_rect({cx - rx * 0.55, y - 1, cx + rx * 0.55, y + 2}, ink);
      }
    }
  }
}

// Splits `total` into `parts` positive widths of at least `min_part`.
std::vector<int> split(int total, int parts, int min_part, Rng& rng) {
  std::vector<int> weights(parts);
  int weight_sum = 0;
  for (auto& w : weights) weight_sum += (w = rng.uniform(70, 130));
  std::vector<int> out(parts);
  int used = 0;
  for (int i = 0; i < parts; ++i) {
    out[i] = i + 1 == parts ? total - used : std::max(min_part, total * weights[i] / weight_sum);
    used += out[i];
  }
  return out;
}

}  // namespace

SyntheticStrip generate_synthetic_strip(std::uint64_t seed, std::size_t index) {
  Rng rng(seed * 0x9E3779B97F4A7C15ull + index);
  SyntheticStrip strip;
  char id[32];
  std::snprintf(id, sizeof id, "synth_%03zu", index);
  strip.image_id = id;
  strip.black_gutter = index % 2 == 1;
  strip.rows = rng.uniform(1, 2);
  const int total_panels = rng.uniform(strip.rows, 8);

  const int width = 1000;
  const int height = strip.rows == 1 ? 300 : 600;
  const int margin = rng.uniform(10, 24);
  const int gutter = rng.uniform(8, 30);
  const int channels = rng.coin() ? 3 : 1;

  const std::uint8_t background =
      strip.black_gutter ? static_cast<std::uint8_t>(rng.uniform(0, 24)) : static_cast<std::uint8_t>(rng.uniform(232, 255));
  const std::uint8_t sheet = strip.black_gutter ? static_cast<std::uint8_t>(rng.uniform(225, 255)) : background;
  const std::uint8_t ink = static_cast<std::uint8_t>(rng.uniform(0, 30));
  RasterImage img(width, height, channels, background);

  std::vector<int> per_row(strip.rows, 0);
  if (strip.rows == 1) {
    per_row[0] = total_panels;
  } else {
    per_row[0] = rng.uniform(std::max(1, total_panels - 4), std::min(4, total_panels - 1));
    per_row[1] = total_panels - per_row[0];
  }

  const int row_height = (height - 2 * margin - (strip.rows - 1) * gutter) / strip.rows;
  for (int r = 0; r < strip.rows; ++r) {
    const int n = per_row[r];
    const int usable = width - 2 * margin - (n - 1) * gutter;
    const auto widths = split(usable, n, 60, rng);
    int x = margin;
    const int y = margin + r * (row_height + gutter);
    for (int i = 0; i < n; ++i) {
      const BoundingBox panel{static_cast<double>(x), static_cast<double>(y), static_cast<double>(x + widths[i]),
                              static_cast<double>(y + row_height)};
      strip.panels.push_back(panel);
      if (strip.black_gutter) {
        img.fill_rect(panel, sheet);
        draw_contents(img, {panel.x_min + 6, panel.y_min + 6, panel.x_max - 6, panel.y_max - 6}, ink, sheet, rng);
      } else {
        const int thickness = rng.uniform(2, 4);
        draw_frame(img, panel, thickness, ink);
        const double pad = thickness + 6;
        draw_contents(img, {panel.x_min + pad, panel.y_min + pad, panel.x_max - pad, panel.y_max - pad}, ink, sheet,
                      rng);
      }
      x += widths[i] + gutter;
    }
  }
  strip.image = std::move(img);
  return strip;
}

std::vector<SyntheticStrip> generate_synthetic_corpus(std::size_t count, std::uint64_t seed) {
  std::vector<SyntheticStrip> corpus;
  corpus.reserve(count);
  for (std::size_t i = 0; i < count; ++i) corpus.push_back(generate_synthetic_strip(seed, i));
  return corpus;
}

void write_synthetic_corpus(const std::filesystem::path& directory, std::size_t count, std::uint64_t seed) {
  std::filesystem::create_directories(directory);
  nlohmann::ordered_json truth = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < count; ++i) {
    const auto strip = generate_synthetic_strip(seed, i);
    const auto file = strip.image_id + ".png";
    const auto png = encode_png(strip.image);
    std::ofstream out(directory / file, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInputError("cannot write " + (directory / file).string());
    out.write(reinterpret_cast<const char*>(png.data()), static_cast<std::streamsize>(png.size()));

    nlohmann::ordered_json panels = nlohmann::ordered_json::array();
    for (const auto& p : strip.panels)
      panels.push_back({static_cast<int>(p.x_min), static_cast<int>(p.y_min), static_cast<int>(p.x_max),
                        static_cast<int>(p.y_max)});
    truth.push_back({{"image_id", strip.image_id},
                     {"file", file},
                     {"width", strip.image.width()},
                     {"height", strip.image.height()},
                     {"rows", strip.rows},
                     {"gutter", strip.black_gutter ? "black" : "white"},
                     {"panels", panels}});
  }
  std::ofstream out(directory / "ground_truth.json", std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInputError("cannot write ground_truth.json in " + directory.string());
  out << truth.dump(2) << '\n';
}

}  // namespace comicpipe
