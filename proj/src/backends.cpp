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

#include "comicpipe/backends.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "comicpipe/errors.hpp"
#include "comicpipe/utf8.hpp"

namespace comicpipe {

using nlohmann::json;

std::string_view to_string(BackendRole role) noexcept {
  switch (role) {
    case BackendRole::detector: return "detector";
    case BackendRole::classifier: return "classifier";
    case BackendRole::ocr: return "ocr";
    case BackendRole::mllm: return "mllm";
  }
  return "unknown";
}

BackendRole parse_role(std::string_view name) {
  if (name == "detector") return BackendRole::detector;
  if (name == "classifier") return BackendRole::classifier;
  if (name == "ocr") return BackendRole::ocr;
  if (name == "mllm") return BackendRole::mllm;
  throw InvalidInputError("unknown backend role '" + std::string(name) + "'");
}

std::string_view route_for(BackendRole role) noexcept {
  switch (role) {
    case BackendRole::detector: return "/v1/detect";
    case BackendRole::classifier: return "/v1/classify";
    case BackendRole::ocr: return "/v1/ocr";
    case BackendRole::mllm: return "/v1/generate";
  }
  return "";
}

void require_valid(const BackendEndpoint& endpoint) {
  const auto role = std::string(to_string(endpoint.role));
  if (endpoint.url.empty()) throw InvalidInputError(role + " endpoint has no url");
  if (endpoint.timeout_ms <= 0) throw InvalidInputError(role + " endpoint timeout_ms must be positive");
  if (endpoint.max_retries < 0 || endpoint.max_retries > 10)
    throw InvalidInputError(role + " endpoint max_retries must be in [0, 10]");
  const std::string_view url = endpoint.url;
  if (url == "mock:echo") {
    if (endpoint.role != BackendRole::mllm) throw InvalidInputError("mock:echo only serves the mllm role");
    return;
  }
  if (url.starts_with("mock:")) {
    if (url.size() == 5) throw InvalidInputError(role + " mock endpoint needs a fixture path");
    return;
  }
  if (!url.starts_with("http://") && !url.starts_with("https://"))
    throw InvalidInputError(role + " endpoint url must be http(s):// or mock:<fixture>: " + endpoint.url);
}

// ---- hashing / encoding ----

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[SHA256_DIGEST_LENGTH];
  unsigned int length = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string sha256_hex(std::string_view text) {
  return sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw InvalidInputError("base64 length is not a multiple of 4");
  std::vector<std::uint8_t> out(3 * (text.size() / 4));
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw InvalidInputError("malformed base64");
  std::size_t padding = 0;
  if (!text.empty() && text.back() == '=') ++padding;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++padding;
  out.resize(static_cast<std::size_t>(n) - padding);
  return out;
}

json canonicalize_request(std::string_view route, const json& body) {
  json canonical = body;
  if (canonical.is_object() && canonical.contains("image_b64")) {
    const auto& encoded = canonical["image_b64"];
    if (!encoded.is_string()) throw InvalidInputError("image_b64 must be a string");
    canonical["image_sha256"] = sha256_hex(base64_decode(encoded.get<std::string>()));
    canonical.erase("image_b64");
  }
  canonical["route"] = std::string(route);
  return canonical;
}

std::string request_fingerprint(std::string_view route, const json& body) {
  return sha256_hex(canonicalize_request(route, body).dump());
}

// ---- response schema ----

namespace {

[[noreturn]] void protocol_violation(std::string_view route, const std::string& what) {
  throw ProtocolError(std::string(route) + " response: " + what);
}

BoundingBox parse_box(std::string_view route, const json& value) {
  if (!value.is_array() || value.size() != 4) protocol_violation(route, "box must be an array of 4 numbers");
  double c[4];
  for (int i = 0; i < 4; ++i) {
    if (!value[i].is_number()) protocol_violation(route, "box coordinates must be numbers");
    c[i] = value[i].get<double>();
    if (!std::isfinite(c[i])) protocol_violation(route, "box coordinates must be finite");
  }
  BoundingBox box{c[0], c[1], c[2], c[3]};
  if (!box.valid()) protocol_violation(route, "box must satisfy 0 <= x_min <= x_max and 0 <= y_min <= y_max");
  return box;
}

double parse_unit(std::string_view route, const json& value, const char* field) {
  if (!value.is_number()) protocol_violation(route, std::string(field) + " must be a number");
  const double v = value.get<double>();
  if (!(v >= 0.0 && v <= 1.0)) protocol_violation(route, std::string(field) + " outside [0, 1]");
  return v;
}

const json& require_field(std::string_view route, const json& object, const char* field) {
  if (!object.is_object()) protocol_violation(route, "expected an object");
  const auto it = object.find(field);
  if (it == object.end()) protocol_violation(route, std::string("missing field '") + field + "'");
  return *it;
}

const json& require_array(std::string_view route, const json& object, const char* field) {
  const auto& value = require_field(route, object, field);
  if (!value.is_array()) protocol_violation(route, std::string("'") + field + "' must be an array");
  return value;
}

std::string require_string(std::string_view route, const json& object, const char* field) {
  const auto& value = require_field(route, object, field);
  if (!value.is_string()) protocol_violation(route, std::string("'") + field + "' must be a string");
  return value.get<std::string>();
}

}  // namespace

void validate_response_schema(std::string_view route, const json& response) {
  if (route == "/v1/detect") {
    for (const auto& d : require_array(route, response, "detections")) {
      parse_box(route, require_field(route, d, "box"));
      if (require_string(route, d, "label").empty()) protocol_violation(route, "label must be non-empty");
      parse_unit(route, require_field(route, d, "confidence"), "confidence");
    }
  } else if (route == "/v1/classify") {
    for (const auto& s : require_array(route, response, "scores")) {
      if (require_string(route, s, "name").empty()) protocol_violation(route, "name must be non-empty");
      parse_unit(route, require_field(route, s, "score"), "score");
    }
  } else if (route == "/v1/ocr") {
    for (const auto& line : require_array(route, response, "lines")) {
      require_string(route, line, "text");
      parse_box(route, require_field(route, line, "box"));
    }
  } else if (route == "/v1/generate") {
    require_string(route, response, "text");
    const auto it = response.find("reported_token_limit");
    if (it != response.end() && !it->is_null()) {
      if (!it->is_number_integer() || it->get<long>() <= 0)
        protocol_violation(route, "reported_token_limit must be a positive integer");
    }
  } else {
    throw ProtocolError("unknown route " + std::string(route));
  }
}

// ---- fixtures ----

FixtureFile FixtureFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("fixture file not found: " + path.string());
  json document;
  try {
    document = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInputError("fixture " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!document.is_object() || !document.contains("entries") || !document["entries"].is_array())
    throw InvalidInputError("fixture " + path.string() + " needs an 'entries' array");

  FixtureFile fixture;
  for (const auto& e : document["entries"]) {
    FixtureEntry entry;
    try {
      entry.route = e.at("route").get<std::string>();
      entry.fingerprint = e.at("fingerprint").get<std::string>();
      entry.request = e.at("request");
      entry.response = e.at("response");
    } catch (const json::exception& ex) {
      throw InvalidInputError("fixture " + path.string() + ": malformed entry: " + ex.what());
    }
    if (entry.request.value("route", "") != entry.route)
      throw InvalidInputError("fixture " + path.string() + ": request route differs from entry route");
    if (sha256_hex(entry.request.dump()) != entry.fingerprint)
      throw InvalidInputError("fixture " + path.string() + ": fingerprint mismatch for " + entry.fingerprint);
    try {
      validate_response_schema(entry.route, entry.response);
    } catch (const ProtocolError& ex) {
      throw InvalidInputError("fixture " + path.string() + ": " + ex.what());
    }
    fixture.entries_.push_back(std::move(entry));
  }
  return fixture;
}

void FixtureFile::add(std::string_view route, const json& body, json response) {
  validate_response_schema(route, response);
  FixtureEntry entry;
  entry.route = std::string(route);
  entry.request = canonicalize_request(route, body);
  entry.fingerprint = sha256_hex(entry.request.dump());
  entry.response = std::move(response);
  for (auto& existing : entries_) {
    if (existing.fingerprint == entry.fingerprint) {
      existing = std::move(entry);
      return;
    }
  }
  entries_.push_back(std::move(entry));
}

const FixtureEntry* FixtureFile::find(std::string_view fingerprint) const {
  for (const auto& e : entries_)
    if (e.fingerprint == fingerprint) return &e;
  return nullptr;
}

json FixtureFile::to_json() const {
  json entries = json::array();
  for (const auto& e : entries_) {
    entries.push_back({{"route", e.route}, {"fingerprint", e.fingerprint}, {"request", e.request},
                       {"response", e.response}});
  }
  return {{"entries", entries}};
}

void FixtureFile::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInputError("cannot write fixture " + path.string());
  out << to_json().dump(2) << '\n';
}

// ---- mocks ----

RequestRecorder::RequestRecorder(std::filesystem::path record_path) : record_path_(std::move(record_path)) {}

void RequestRecorder::record(const json& canonical_request) {
  std::lock_guard lock(mutex_);
  recorded_.push_back(canonical_request);
  if (!record_path_.empty()) {
    std::ofstream out(record_path_, std::ios::binary | std::ios::app);
    out << canonical_request.dump() << '\n';
  }
}

std::vector<json> RequestRecorder::recorded() const {
  std::lock_guard lock(mutex_);
  return recorded_;
}

MockTransport::MockTransport(FixtureFile fixture, std::filesystem::path record_path)
    : fixture_(std::move(fixture)), recorder_(std::move(record_path)) {}

json MockTransport::post(std::string_view route, const json& body) {
  const auto canonical = canonicalize_request(route, body);
  recorder_.record(canonical);
  const auto fingerprint = sha256_hex(canonical.dump());
  const auto* entry = fixture_.find(fingerprint);
  if (!entry) {
    throw BackendError("mock backend has no fixture entry for " + std::string(route) + " request " +
                           fingerprint,
                       "fixture_miss");
  }
  return entry->response;
}

EchoTransport::EchoTransport(std::filesystem::path record_path) : recorder_(std::move(record_path)) {}

json EchoTransport::post(std::string_view route, const json& body) {
  recorder_.record(canonicalize_request(route, body));
  if (route != "/v1/generate") throw BackendError("echo mock only serves /v1/generate", "unsupported_route");
  const auto prompt = body.value("prompt", std::string());
  return {{"text", "DESC:" + utf8_prefix(prompt, 20)}};
}

std::unique_ptr<Transport> make_transport(const BackendEndpoint& endpoint) {
  require_valid(endpoint);
  const std::string_view url = endpoint.url;
  if (url == "mock:echo") return std::make_unique<EchoTransport>(endpoint.record_path);
  if (url.starts_with("mock:")) {
    return std::make_unique<MockTransport>(FixtureFile::load(std::string(url.substr(5))), endpoint.record_path);
  }
  return std::make_unique<HttpTransport>(endpoint);
}

// ---- clients ----

namespace {

json image_field(const ImagePayload& image) {
  if (image.bytes.empty()) throw InvalidInputError("image payload is empty");
  if (image.bytes.size() > kMaxImageBytes)
    throw InvalidInputError("image payload of " + std::to_string(image.bytes.size()) +
                            " bytes exceeds the 20 MB limit");
  if (image.width <= 0 || image.height <= 0) throw InvalidInputError("image payload has no dimensions");
  return base64_encode(image.bytes);
}

json post_validated(Transport& transport, std::string_view route, const json& body) {
  auto response = transport.post(route, body);
  validate_response_schema(route, response);
  return response;
}

void require_within(std::string_view route, const BoundingBox& box, const ImagePayload& image) {
  constexpr double kSlack = 1e-6;
  if (box.x_max > image.width + kSlack || box.y_max > image.height + kSlack)
    protocol_violation(route, "box extends past the image bounds");
}

}  // namespace

std::vector<Detection> detect(const ImagePayload& image, std::span<const std::string> labels,
                              double text_threshold, double box_threshold, Transport& transport) {
  if (labels.empty()) throw InvalidInputError("detect needs at least one label");
  const std::string_view route = "/v1/detect";
  // Encoded first: a throw inside the braced list below leaks on GCC 11.
  auto encoded = image_field(image);
  json body = {{"image_b64", std::move(encoded)},
               {"labels", json(std::vector<std::string>(labels.begin(), labels.end()))},
               {"text_threshold", text_threshold},
               {"box_threshold", box_threshold}};
  const auto response = post_validated(transport, route, body);

  std::vector<Detection> detections;
  for (const auto& d : response["detections"]) {
    Detection det;
    det.box = parse_box(route, d["box"]);
    det.label = d["label"].get<std::string>();
    det.confidence = d["confidence"].get<double>();
    require_within(route, det.box, image);
    if (std::find(labels.begin(), labels.end(), det.label) == labels.end())
      protocol_violation(route, "label '" + det.label + "' was not requested");
    detections.push_back(std::move(det));
  }
  return detections;
}

std::vector<LabelScore> classify(const ImagePayload& crop, std::span<const CandidateLabel> candidates,
                                 Transport& transport) {
  if (candidates.empty()) throw InvalidInputError("classify needs at least one candidate");
  const std::string_view route = "/v1/classify";
  auto encoded = image_field(crop);
  json list = json::array();
  for (const auto& c : candidates) list.push_back({{"name", c.name}, {"prompt", c.prompt}});
  const auto response = post_validated(transport, route, {{"image_b64", std::move(encoded)}, {"candidates", list}});

  std::vector<LabelScore> by_candidate(candidates.size());
  std::vector<bool> seen(candidates.size(), false);
  for (const auto& s : response["scores"]) {
    const auto name = s["name"].get<std::string>();
    const auto it = std::find_if(candidates.begin(), candidates.end(),
                                 [&](const CandidateLabel& c) { return c.name == name; });
    if (it == candidates.end()) protocol_violation(route, "score for unknown candidate '" + name + "'");
    const auto idx = static_cast<std::size_t>(it - candidates.begin());
    if (seen[idx]) protocol_violation(route, "duplicate score for '" + name + "'");
    seen[idx] = true;
    by_candidate[idx] = {name, s["score"].get<double>()};
  }
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (!seen[i]) protocol_violation(route, "missing score for '" + candidates[i].name + "'");

  std::stable_sort(by_candidate.begin(), by_candidate.end(),
                   [](const LabelScore& a, const LabelScore& b) { return a.score > b.score; });
  return by_candidate;
}

OcrResult ocr(const ImagePayload& crop, Transport& transport) {
  const std::string_view route = "/v1/ocr";
  auto encoded = image_field(crop);
  const auto response = post_validated(transport, route, {{"image_b64", std::move(encoded)}});
  OcrResult result;
  for (const auto& line : response["lines"]) {
    OcrLine l{line["text"].get<std::string>(), parse_box(route, line["box"])};
    require_within(route, l.box, crop);
    result.lines.push_back(std::move(l));
  }
  sort_lines(result.lines);
  return result;
}

Generation generate(const ImagePayload& image, std::string_view prompt, Transport& transport) {
  if (prompt.empty()) throw InvalidInputError("generate needs a non-empty prompt");
  const std::string_view route = "/v1/generate";
  auto encoded = image_field(image);
  const auto response =
      post_validated(transport, route, {{"image_b64", std::move(encoded)}, {"prompt", std::string(prompt)}});
  Generation g;
  g.text = response["text"].get<std::string>();
  const auto it = response.find("reported_token_limit");
  if (it != response.end() && !it->is_null()) g.reported_token_limit = it->get<long>();
  return g;
}

}  // namespace comicpipe
