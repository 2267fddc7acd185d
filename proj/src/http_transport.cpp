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

#include <httplib.h>

#include "comicpipe/backends.hpp"
#include "comicpipe/errors.hpp"

namespace comicpipe {

using nlohmann::json;

HttpTransport::HttpTransport(BackendEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  require_valid(endpoint_);
  const auto& url = endpoint_.url;
  const auto scheme_end = url.find("://");
  const auto path_start = url.find('/', scheme_end + 3);
  origin_ = url.substr(0, path_start);
  if (path_start != std::string::npos) {
    path_prefix_ = url.substr(path_start);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  }
}

json HttpTransport::post(std::string_view route, const json& body) {
  const auto path = path_prefix_ + std::string(route);
  const auto payload = body.dump();
  const auto timeout_s = endpoint_.timeout_ms / 1000;
  const auto timeout_us = (endpoint_.timeout_ms % 1000) * 1000;

  httplib::Headers headers;
  if (!endpoint_.bearer_token.empty()) headers.emplace("Authorization", "Bearer " + endpoint_.bearer_token);

  std::string last_error;
  for (int attempt = 0; attempt <= endpoint_.max_retries; ++attempt) {
    httplib::Client client(origin_);
    client.set_connection_timeout(timeout_s, timeout_us);
    client.set_read_timeout(timeout_s, timeout_us);
    client.set_write_timeout(timeout_s, timeout_us);

    auto result = client.Post(path, headers, payload, "application/json");
    if (!result) {
      last_error = httplib::to_string(result.error());
      continue;
    }

    // 5xx and 429 are transient: retried like a dropped connection.
    const int status = result->status;
    const bool transient = status >= 500 || status == 429;

    json response;
    try {
      response = json::parse(result->body);
    } catch (const json::parse_error&) {
      if (status >= 200 && status < 300) throw ProtocolError(origin_ + path + " returned a body that is not JSON");
      response = nullptr;
    }
    if (status < 200 || status >= 300) {
      std::string code = "http_status";
      std::string message = "HTTP " + std::to_string(status);
      if (response.is_object() && response.contains("error") && response["error"].is_object()) {
        const auto& err = response["error"];
        if (err.contains("code") && err["code"].is_string()) code = err["code"].get<std::string>();
        if (err.contains("message") && err["message"].is_string()) message = err["message"].get<std::string>();
      }
      if (transient) {
        last_error = message + " (" + code + ")";
        continue;
      }
      throw BackendError(origin_ + path + ": " + message, code);
    }
    if (!response.is_object()) throw ProtocolError(origin_ + path + " returned JSON that is not an object");
    return response;
  }
  throw BackendUnavailableError(std::string(to_string(endpoint_.role)) + " backend at " + origin_ + path +
                                " unavailable after " + std::to_string(endpoint_.max_retries + 1) +
                                " attempt(s): " + last_error);
}

}  // namespace comicpipe
