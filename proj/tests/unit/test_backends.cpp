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

#include <fstream>

#include "comicpipe/backends.hpp"
#include "comicpipe/errors.hpp"
#include "comicpipe/evaluation.hpp"
#include "comicpipe/identity.hpp"
#include "comicpipe/prompting.hpp"
#include "support/fakes.hpp"
#include "support/oracles.hpp"

using namespace comicpipe;
using nlohmann::json;
using testing_support::chomp;
using testing_support::fixtures;
using testing_support::read_text;
using testing_support::ScriptedTransport;
using testing_support::TempDir;

namespace {

ImagePayload payload_of(const std::filesystem::path& path) {
  ImagePayload p;
  p.bytes = read_file_bytes(path);
  const auto img = decode_image(p.bytes);
  p.width = img.width();
  p.height = img.height();
  return p;
}

MockTransport mock(const std::string& relative, const std::filesystem::path& record = {}) {
  return MockTransport(FixtureFile::load(fixtures() / relative), record);
}

ImagePayload small() { return to_payload(RasterImage(10, 10, 1, 255)); }

ScriptedTransport replying(json response) {
  return ScriptedTransport([response](std::string_view, const json&) { return response; });
}

}  // namespace

TEST(Encoding, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Encoding, Base64Rfc4648Vectors) {
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"", ""}, {"f", "Zg=="}, {"fo", "Zm8="}, {"foo", "Zm9v"}, {"foob", "Zm9vYg=="}, {"foobar", "Zm9vYmFy"}};
  for (const auto& [plain, encoded] : cases) {
    const std::vector<std::uint8_t> bytes(plain.begin(), plain.end());
    EXPECT_EQ(base64_encode(bytes), encoded);
    EXPECT_EQ(base64_decode(encoded), bytes);
  }
  EXPECT_THROW(base64_decode("abc"), InvalidInputError);
  EXPECT_THROW(base64_decode("@@@@"), InvalidInputError);
}

TEST(Encoding, Base64RoundTripProperty) {
  oracle::Gen gen(61);
  for (int i = 0; i < 200; ++i) {
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(gen.integer(0, 70)));
    for (auto& b : bytes) b = static_cast<std::uint8_t>(gen.integer(0, 255));
    EXPECT_EQ(base64_decode(base64_encode(bytes)), bytes);
  }
}

TEST(Canonical, ImageReplacedByDigestAndRouteAdded) {
  const std::vector<std::uint8_t> bytes = {1, 2, 3};
  const auto c = canonicalize_request("/v1/ocr", {{"image_b64", base64_encode(bytes)}});
  EXPECT_FALSE(c.contains("image_b64"));
  EXPECT_EQ(c["image_sha256"], sha256_hex(bytes));
  EXPECT_EQ(c["route"], "/v1/ocr");
}

TEST(Canonical, FingerprintIgnoresKeyOrderProperty) {
  oracle::Gen gen(62);
  for (int i = 0; i < 200; ++i) {
    std::vector<std::pair<std::string, int>> fields;
    for (int k = gen.integer(1, 6); k > 0; --k) fields.emplace_back("k" + std::to_string(gen.integer(0, 9)), gen.integer(0, 99));
    nlohmann::ordered_json forward, backward;
    for (const auto& [key, v] : fields) forward[key] = v;
    for (auto it = fields.rbegin(); it != fields.rend(); ++it)
      if (!backward.contains(it->first)) backward[it->first] = forward[it->first];
    EXPECT_EQ(request_fingerprint("/v1/ocr", json::parse(forward.dump())),
              request_fingerprint("/v1/ocr", json::parse(backward.dump())));
  }
  EXPECT_NE(request_fingerprint("/v1/ocr", {{"a", 1}}), request_fingerprint("/v1/detect", {{"a", 1}}));
}

TEST(Endpoint, Validation) {
  BackendEndpoint e;
  e.role = BackendRole::detector;
  e.url = "http://localhost:8000";
  EXPECT_NO_THROW(require_valid(e));
  e.url = "mock:echo";
  EXPECT_THROW(require_valid(e), InvalidInputError);
  e.role = BackendRole::mllm;
  EXPECT_NO_THROW(require_valid(e));
  e.url = "ftp://x";
  EXPECT_THROW(require_valid(e), InvalidInputError);
  e.url = "https://x";
  e.timeout_ms = 0;
  EXPECT_THROW(require_valid(e), InvalidInputError);
  EXPECT_THROW(parse_role("painter"), InvalidInputError);
  EXPECT_EQ(route_for(BackendRole::classifier), "/v1/classify");
}

TEST(FixtureFile, SaveLoadRoundTripAndTamperDetection) {
  TempDir dir("fixture");
  FixtureFile f;
  f.add("/v1/ocr", {{"image_b64", base64_encode(small().bytes)}}, {{"lines", json::array()}});
  f.save(dir / "f.json");
  const auto loaded = FixtureFile::load(dir / "f.json");
  ASSERT_EQ(loaded.entries().size(), 1u);
  EXPECT_NE(loaded.find(f.entries()[0].fingerprint), nullptr);

  auto doc = json::parse(read_text(dir / "f.json"));
  doc["entries"][0]["request"]["extra"] = 1;
  std::ofstream(dir / "bad.json") << doc.dump();
  EXPECT_THROW(FixtureFile::load(dir / "bad.json"), InvalidInputError);

  doc = json::parse(read_text(dir / "f.json"));
  doc["entries"][0]["response"] = {{"lines", "nope"}};
  std::ofstream(dir / "bad2.json") << doc.dump();
  EXPECT_THROW(FixtureFile::load(dir / "bad2.json"), InvalidInputError);
  EXPECT_THROW(FixtureFile::load(dir / "absent.json"), NotFoundError);
}

TEST(MockTransport, MissIsBackendErrorAndRequestsAreRecorded) {
  TempDir dir("record");
  auto t = mock("blank/ocr.json", dir / "rec.jsonl");
  EXPECT_TRUE(ocr(payload_of(fixtures() / "blank/crop.png"), t).lines.empty());
  try {
    ocr(small(), t);
    FAIL() << "expected a fixture miss";
  } catch (const BackendError& e) {
    EXPECT_EQ(e.code(), "fixture_miss");
  }
  const auto recorded = t.recorded();
  ASSERT_EQ(recorded.size(), 2u);
  EXPECT_EQ(recorded[1]["image_sha256"], sha256_hex(small().bytes));
  std::ifstream in(dir / "rec.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(json::parse(line), recorded[static_cast<std::size_t>(lines)]);
    ++lines;
  }
  EXPECT_EQ(lines, 2);
}

TEST(EchoTransport, PrefixOfPrompt) {
  EchoTransport t;
  EXPECT_EQ(generate(small(), "Your task is to write a text", t).text, "DESC:Your task is to writ");
  EXPECT_EQ(generate(small(), "漫画を説明して", t).text, "DESC:漫画を説明して");
  EXPECT_THROW(t.post("/v1/ocr", json::object()), BackendError);
}

TEST(Clients, DetectFixtureGivesAnnotatedBoxes) {
  auto t = mock("dilbert/detector.json");
  const std::vector<std::string> labels = {"text", "character"};
  const auto dets = detect(payload_of(fixtures() / "dilbert/strip.png"), labels, 0.2, 0.2, t);
  const auto gt = load_annotations(fixtures() / "dilbert/annotations.json");
  ASSERT_EQ(gt.size(), 1u);
  std::size_t characters = 0, texts = 0;
  for (const auto& d : dets) {
    (d.label == "text" ? texts : characters) += 1;
    const bool annotated = std::any_of(gt[0].boxes.begin(), gt[0].boxes.end(),
                                       [&](const LabeledBox& b) { return b.box == d.box && b.label == d.label; });
    EXPECT_TRUE(annotated);
  }
  EXPECT_EQ(characters, 5u);
  EXPECT_EQ(texts, 4u);
}

TEST(Clients, DetectRejectsBadResponses) {
  const std::vector<std::string> labels = {"text"};
  auto outside = replying({{"detections", {{{"box", {0, 0, 11, 5}}, {"label", "text"}, {"confidence", 0.5}}}}});
  EXPECT_THROW(detect(small(), labels, 0.2, 0.2, outside), ProtocolError);
  auto unrequested = replying({{"detections", {{{"box", {0, 0, 5, 5}}, {"label", "cat"}, {"confidence", 0.5}}}}});
  EXPECT_THROW(detect(small(), labels, 0.2, 0.2, unrequested), ProtocolError);
  auto malformed = replying({{"detections", {{{"box", {0, 0, 5}}, {"label", "text"}, {"confidence", 0.5}}}}});
  EXPECT_THROW(detect(small(), labels, 0.2, 0.2, malformed), ProtocolError);
  auto bad_conf = replying({{"detections", {{{"box", {0, 0, 5, 5}}, {"label", "text"}, {"confidence", 2}}}}});
  EXPECT_THROW(detect(small(), labels, 0.2, 0.2, bad_conf), ProtocolError);
  EXPECT_THROW(detect(small(), {}, 0.2, 0.2, outside), InvalidInputError);
  EXPECT_THROW(detect(ImagePayload{}, labels, 0.2, 0.2, outside), InvalidInputError);
}

TEST(Clients, ClassifyGarfieldFixture) {
  auto t = mock("garfield/classifier.json");
  const auto candidates = candidate_labels(CharacterLabelRegistry::builtin(), "garfield");
  ASSERT_EQ(candidates.size(), 4u);
  const auto scores = classify(payload_of(fixtures() / "garfield/crop.png"), candidates, t);
  EXPECT_EQ(scores.front().name, "garfield");
  EXPECT_DOUBLE_EQ(scores.front().score, 0.92);
}

TEST(Clients, ClassifyNeedsExactCoverageAndKeepsTieOrder) {
  const std::vector<CandidateLabel> cands = {{"a", "pa"}, {"b", "pb"}, {"c", "pc"}};
  auto tied = replying({{"scores", {{{"name", "c"}, {"score", 0.2}}, {{"name", "b"}, {"score", 0.4}}, {{"name", "a"}, {"score", 0.4}}}}});
  const auto s = classify(small(), cands, tied);
  EXPECT_EQ(s[0].name, "a");
  EXPECT_EQ(s[1].name, "b");
  EXPECT_EQ(s[2].name, "c");
  auto missing = replying({{"scores", {{{"name", "a"}, {"score", 0.4}}}}});
  EXPECT_THROW(classify(small(), cands, missing), ProtocolError);
  auto dup = replying({{"scores", {{{"name", "a"}, {"score", 0.4}}, {{"name", "a"}, {"score", 0.4}}, {{"name", "b"}, {"score", 0.1}}}}});
  EXPECT_THROW(classify(small(), cands, dup), ProtocolError);
}

TEST(Clients, OcrFixtures) {
  auto blank = mock("blank/ocr.json");
  EXPECT_TRUE(ocr(payload_of(fixtures() / "blank/crop.png"), blank).lines.empty());

  // The panel-3 balloon of the strip, cropped at its annotated box.
  auto t = mock("dilbert/ocr.json");
  const auto strip = load_image(fixtures() / "dilbert/strip.png");
  const auto r = ocr(to_payload(strip.crop({712, 58, 882, 116})), t);
  std::vector<std::string> texts;
  for (const auto& l : r.lines) texts.push_back(l.text);
  EXPECT_EQ(texts, (std::vector<std::string>{"IT ALL SEEMS", "SO ARBI-", "TRARY."}));
}

TEST(Clients, GenerateFixtures) {
  auto t = mock("dilbert/mllm.json");
  const auto image = payload_of(fixtures() / "dilbert/strip.png");
  EXPECT_EQ(generate(image, kBasePrompt, t).text,
            chomp(read_text(fixtures() / "dilbert/description.base.golden.txt")));
  EXPECT_EQ(generate(image, chomp(read_text(fixtures() / "dilbert/prompt.enhanced.golden.txt")), t).text,
            chomp(read_text(fixtures() / "dilbert/description.enhanced.golden.txt")));
  EXPECT_THROW(generate(image, "", t), InvalidInputError);
  auto bad = replying({{"text", "x"}, {"reported_token_limit", -3}});
  EXPECT_THROW(generate(image, "p", bad), ProtocolError);
  auto no_text = replying(json::object());
  EXPECT_THROW(generate(image, "p", no_text), ProtocolError);
}
