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

#include <atomic>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "comicpipe/backends.hpp"
#include "comicpipe/raster.hpp"

namespace comicpipe {

// Base instruction: asks for a per-panel description covering panel
// count, characters, objects, actions and dialogue.
extern const std::string_view kBasePrompt;
// Sentence placed between the base prompt and the context JSON.
extern const std::string_view kContextConnector;

enum class PromptMode { base, enhanced };

std::string_view to_string(PromptMode mode) noexcept;
PromptMode parse_prompt_mode(std::string_view name);

struct PromptBundle {
  std::string base{kBasePrompt};
  std::string connector{kContextConnector};
  std::string context_json = "{}";
  PromptMode mode = PromptMode::base;
};

// {"base": "...", "connector": "..."}; missing keys keep the defaults.
// Throws NotFoundError / InvalidInputError.
PromptBundle load_prompt_template(const std::filesystem::path& path);

// base: the base prompt alone. enhanced: base + "\n" + connector + "\n" + context.
std::string render_prompt(const PromptBundle& bundle);

struct TokenBudget {
  long max_tokens = 4096;
  double chars_per_token = 4.0;
};

void require_valid(const TokenBudget& budget);

struct BudgetCheck {
  bool fits = true;
  long estimated_tokens = 0;
};

// estimated_tokens = ceil(code points / chars_per_token).
BudgetCheck check_budget(std::string_view prompt, const TokenBudget& budget);

enum class OverflowPolicy { fail, send, degrade };

std::string_view to_string(OverflowPolicy policy) noexcept;
OverflowPolicy parse_overflow_policy(std::string_view name);

// UTC ISO-8601 time, or SOURCE_DATE_EPOCH when that variable is set.
std::string run_timestamp();

struct RunRecord {
  std::string image_id;
  PromptMode mode = PromptMode::base;
  std::string prompt_sha256;
  long estimated_tokens = 0;
  std::string response;
  std::string timestamp;
};

// JSON-lines log of describe calls. Appends are serialized; each record is
// written with a single write call.
class RunLog {
 public:
  explicit RunLog(std::filesystem::path path);
  void append(const RunRecord& record);
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  std::mutex mutex_;
};

// Generation client that remembers the token limit a backend reports.
class MllmBackend {
 public:
  explicit MllmBackend(Transport& transport) : transport_(transport) {}

  Generation generate(const ImagePayload& image, std::string_view prompt);
  std::optional<long> reported_token_limit() const noexcept;

 private:
  Transport& transport_;
  std::atomic<long> reported_limit_{0};
};

struct DescribeOptions {
  TokenBudget budget;
  OverflowPolicy on_overflow = OverflowPolicy::fail;
  std::string image_id;
  RunLog* run_log = nullptr;
};

struct DescribeResult {
  std::string text;
  std::string prompt;  // what was actually sent
  PromptMode mode_sent = PromptMode::base;
  BudgetCheck budget;  // for the prompt that was sent
  bool overflowed = false;  // the requested prompt did not fit
};

// Renders, applies the overflow policy, generates. A backend-reported token
// limit overrides budget.max_tokens. Throws OverflowError under the fail
// policy and GenerationError on backend failure.
DescribeResult describe(const ImagePayload& image, const PromptBundle& bundle, MllmBackend& mllm,
                        const DescribeOptions& options = {});

}  // namespace comicpipe
