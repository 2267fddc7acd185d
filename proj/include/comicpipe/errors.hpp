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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace comicpipe {

// Bad arguments or malformed input data (config, annotation files, images).
class InvalidInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A named entity (series, file, fixture entry) does not exist.
class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// PNG/JPEG could not be read or decoded.
class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Any failure reported by or while talking to a model backend.
class BackendError : public std::runtime_error {
 public:
  explicit BackendError(const std::string& message, std::string code = "backend_error")
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// Transport failed after all retries.
class BackendUnavailableError : public BackendError {
 public:
  explicit BackendUnavailableError(const std::string& message)
      : BackendError(message, "backend_unavailable") {}
};

// Backend answered with data that violates the wire protocol. Never retried.
class ProtocolError : public BackendError {
 public:
  explicit ProtocolError(const std::string& message)
      : BackendError(message, "protocol_error") {}
};

// Backend failure while classifying one crop; carries the crop position.
class CropBackendError : public BackendError {
 public:
  CropBackendError(std::size_t crop_index, const BackendError& cause)
      : BackendError("crop " + std::to_string(crop_index) + ": " + cause.what(),
                     cause.code()),
        crop_index_(crop_index) {}

  std::size_t crop_index() const noexcept { return crop_index_; }

 private:
  std::size_t crop_index_;
};

// Backend failure during generation; carries the sha256 of the prompt sent.
class GenerationError : public BackendError {
 public:
  GenerationError(std::string prompt_sha256, const BackendError& cause)
      : BackendError("generation failed for prompt " + prompt_sha256 + ": " + cause.what(),
                     cause.code()),
        prompt_sha256_(std::move(prompt_sha256)) {}

  const std::string& prompt_sha256() const noexcept { return prompt_sha256_; }

 private:
  std::string prompt_sha256_;
};

// Prompt exceeds the token budget and the overflow policy is "fail".
class OverflowError : public std::runtime_error {
 public:
  OverflowError(const std::string& message, long estimated_tokens, long max_tokens)
      : std::runtime_error(message),
        estimated_tokens_(estimated_tokens),
        max_tokens_(max_tokens) {}

  long estimated_tokens() const noexcept { return estimated_tokens_; }
  long max_tokens() const noexcept { return max_tokens_; }

 private:
  long estimated_tokens_;
  long max_tokens_;
};

}  // namespace comicpipe
