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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "comicpipe/errors.hpp"
#include "comicpipe/raster.hpp"

using namespace comicpipe;

namespace {

RasterImage checker(int w, int h, int channels) {
  RasterImage img(w, h, channels, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < channels; ++c) img.at(x, y, c) = static_cast<std::uint8_t>((x * 7 + y * 13 + c * 50) % 256);
  return img;
}

}  // namespace

TEST(Raster, PngRoundTripGrayAndRgb) {
  for (int channels : {1, 3}) {
    const auto img = checker(37, 21, channels);
    const auto bytes = encode_png(img);
    EXPECT_EQ(decode_image(bytes), img);
  }
}

TEST(Raster, PngBytesDependOnlyOnPixels) {
  EXPECT_EQ(encode_png(checker(30, 20, 3)), encode_png(checker(30, 20, 3)));
}

TEST(Raster, JpegDecodesToSameSize) {
  const auto img = checker(40, 30, 3);
  const auto decoded = decode_image(encode_jpeg(img, 95));
  EXPECT_EQ(decoded.width(), 40);
  EXPECT_EQ(decoded.height(), 30);
  EXPECT_EQ(decoded.channels(), 3);
}

TEST(Raster, GarbageIsDecodeError) {
  const std::vector<std::uint8_t> junk = {'n', 'o', 't', ' ', 'a', 'n', ' ', 'i', 'm', 'a', 'g', 'e'};
  EXPECT_THROW(decode_image(junk), DecodeError);
  auto png = encode_png(checker(10, 10, 1));
  png.resize(png.size() / 2);
  EXPECT_THROW(decode_image(png), DecodeError);
  EXPECT_THROW(decode_image(std::vector<std::uint8_t>{}), DecodeError);
}

TEST(Raster, UnreadableFileIsDecodeError) {
  EXPECT_THROW(read_file_bytes("/nonexistent/strip.png"), DecodeError);
}

TEST(Raster, IntensityUsesRec601) {
  RasterImage img(1, 1, 3, 0);
  img.at(0, 0, 0) = 255;
  EXPECT_EQ(img.intensity(0, 0), 76);  // 0.299 * 255 = 76.245
  img.at(0, 0, 1) = 255;
  img.at(0, 0, 2) = 255;
  EXPECT_EQ(img.intensity(0, 0), 255);
}

TEST(Raster, CropSnapsOutwardAndClips) {
  const auto img = checker(20, 10, 1);
  const auto c = img.crop({2.5, 1.2, 5.1, 3.0});
  EXPECT_EQ(c.width(), 4);  // columns 2..5
  EXPECT_EQ(c.height(), 2);
  EXPECT_EQ(c.at(0, 0), img.at(2, 1));
  EXPECT_EQ(img.crop({15, 5, 40, 40}).width(), 5);
  EXPECT_THROW(img.crop({30, 30, 40, 40}), InvalidInputError);
}

TEST(Raster, FillRectClipsToImage) {
  RasterImage img(4, 4, 1, 0);
  img.fill_rect({-2, -2, 2, 2}, 9);
  EXPECT_EQ(img.at(0, 0), 9);
  EXPECT_EQ(img.at(1, 1), 9);
  EXPECT_EQ(img.at(2, 2), 0);
}

TEST(Raster, ValidationRejectsBadShapes) {
  EXPECT_THROW(RasterImage(2, 2, 2, 0), InvalidInputError);
  EXPECT_THROW(RasterImage(2, 2, 1, std::vector<std::uint8_t>(3)), InvalidInputError);
}
