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

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "comicpipe/geometry.hpp"
#include "comicpipe/raster.hpp"
#include "comicpipe/textflow.hpp"

namespace comicpipe {

// One JSON-over-HTTP protocol serves every model role:
//
//   POST /v1/detect    {image_b64, labels, text_threshold, box_threshold}
//                      -> {detections: [{box: [x0, y0, x1, y1], label, confidence}]}
//   POST /v1/classify  {image_b64, candidates: [{name, prompt}]}
//                      -> {scores: [{name, score}]}
//   POST /v1/ocr       {image_b64} -> {lines: [{text, box: [x0, y0, x1, y1]}]}
//   POST /v1/generate  {image_b64, prompt} -> {text, reported_token_limit?}
//
// Failures come back as {error: {code, message}} with a non-2xx status.
// The JSON Schemas under protocol/ describe the same shapes.

enum class BackendRole { detector, classifier, ocr, mllm };

std::string_view to_string(BackendRole role) noexcept;
BackendRole parse_role(std::string_view name);
std::string_view route_for(BackendRole role) noexcept;

inline constexpr std::size_t kMaxImageBytes = 20u * 1024u * 1024u;

struct BackendEndpoint {
  BackendRole role = BackendRole::detector;
  // "http(s)://host[:port][/prefix]", "mock:<fixture.json>" or "mock:echo".
  std::string url;
  int timeout_ms = 30000;
  int max_retries = 2;
  // Sent as "Authorization: Bearer <token>" when non-empty.
  std::string bearer_token;
  // Mock transports append each canonical request here as one JSON line.
  std::filesystem::path record_path;
};

void require_valid(const BackendEndpoint& endpoint);

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);
std::string base64_encode(std::span<const std::uint8_t> bytes);
// Throws InvalidInputError on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

// Request body with "image_b64" swapped for "image_sha256" (digest of the
// decoded bytes) and the route added; keys sorted.
nlohmann::json canonicalize_request(std::string_view route, const nlohmann::json& body);
std::string request_fingerprint(std::string_view route, const nlohmann::json& body);

// Structural response checks shared by clients and fixture loading.
// Throws ProtocolError.
void validate_response_schema(std::string_view route, const nlohmann::json& response);

class Transport {
 public:
  virtual ~Transport() = default;
  // Returns the decoded JSON response or throws BackendError.
  virtual nlohmann::json post(std::string_view route, const nlohmann::json& body) = 0;
};

struct FixtureEntry {
  std::string route;
  std::string fingerprint;
  nlohmann::json request;  // canonical form
  nlohmann::json response;
};

// Canned responses keyed by request fingerprint.
class FixtureFile {
 public:
  FixtureFile() = default;

  // Throws NotFoundError / InvalidInputError; verifies every fingerprint and
  // response schema.
  static FixtureFile load(const std::filesystem::path& path);

  void add(std::string_view route, const nlohmann::json& body, nlohmann::json response);
  const FixtureEntry* find(std::string_view fingerprint) const;
  const std::vector<FixtureEntry>& entries() const noexcept { return entries_; }

  nlohmann::json to_json() const;
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<FixtureEntry> entries_;
};

// Appends canonical requests to memory and optionally a JSON-lines file.
class RequestRecorder {
 public:
  explicit RequestRecorder(std::filesystem::path record_path = {});
  void record(const nlohmann::json& canonical_request);
  std::vector<nlohmann::json> recorded() const;

 private:
  std::filesystem::path record_path_;
  mutable std::mutex mutex_;
  std::vector<nlohmann::json> recorded_;
};

class MockTransport : public Transport {
 public:
  explicit MockTransport(FixtureFile fixture, std::filesystem::path record_path = {});

  nlohmann::json post(std::string_view route, const nlohmann::json& body) override;
  std::vector<nlohmann::json> recorded() const { return recorder_.recorded(); }

 private:
  FixtureFile fixture_;
  RequestRecorder recorder_;
};

// Generation-only mock: answers "DESC:" followed by the first 20 characters of
// the prompt.
class EchoTransport : public Transport {
 public:
  explicit EchoTransport(std::filesystem::path record_path = {});

  nlohmann::json post(std::string_view route, const nlohmann::json& body) override;
  std::vector<nlohmann::json> recorded() const { return recorder_.recorded(); }

 private:
  RequestRecorder recorder_;
};

class HttpTransport : public Transport {
 public:
  explicit HttpTransport(BackendEndpoint endpoint);

  nlohmann::json post(std::string_view route, const nlohmann::json& body) override;

 private:
  BackendEndpoint endpoint_;
  std::string origin_;       // scheme://host[:port]
  std::string path_prefix_;  // without trailing slash
};

std::unique_ptr<Transport> make_transport(const BackendEndpoint& endpoint);

// ---- clients ----

struct CandidateLabel {
  std::string name;
  std::string prompt;

  friend bool operator==(const CandidateLabel&, const CandidateLabel&) = default;
};

struct LabelScore {
  std::string name;
  double score = 0.0;
};

struct Generation {
  std::string text;
  std::optional<long> reported_token_limit;
};

std::vector<Detection> detect(const ImagePayload& image, std::span<const std::string> labels,
                              double text_threshold, double box_threshold, Transport& transport);

// Scores sorted descending; ties keep candidate order.
std::vector<LabelScore> classify(const ImagePayload& crop, std::span<const CandidateLabel> candidates,
                                 Transport& transport);

// Lines sorted top-to-bottom; result.box is left for the caller to set.
OcrResult ocr(const ImagePayload& crop, Transport& transport);

Generation generate(const ImagePayload& image, std::string_view prompt, Transport& transport);

}  // namespace comicpipe
