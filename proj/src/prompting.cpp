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

#include "comicpipe/prompting.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>

#include "json.hpp"

#include "comicpipe/errors.hpp"
#include "comicpipe/log.hpp"
#include "comicpipe/utf8.hpp"

namespace comicpipe {

const std::string_view kBasePrompt =
    "Your task is to write a text description for each panel of a comic strip. A comic strip is a "
    "sequence of drawings that tell a story using humor, satire, or irony. Each panel shows a scene "
    "with the characters, objects, actions, and dialogues. Your description should include the "
    "following elements:The number of panels in the comic strip.\n"
    "The names and appearances of the characters in each panel.\n"
    "The objects and background details in each panel.\n"
    "The actions and expressions of the characters in each panel.\n"
    "The dialogues or captions of the characters in each panel, using quotation marks or parentheses.";

const std::string_view kContextConnector =
    "Use the information given below to describe the characters and their dialogues and use your own "
    "knowledge to describe the other elements.";

std::string_view to_string(PromptMode mode) noexcept { return mode == PromptMode::base ? "base" : "enhanced"; }

PromptMode parse_prompt_mode(std::string_view name) {
  if (name == "base") return PromptMode::base;
  if (name == "enhanced") return PromptMode::enhanced;
  throw InvalidInputError("mode must be 'base' or 'enhanced', got '" + std::string(name) + "'");
}

PromptBundle load_prompt_template(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("prompt file not found: " + path.string());
  nlohmann::json document;
  try {
    document = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInputError("prompt file " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!document.is_object()) throw InvalidInputError("prompt file must hold a JSON object");
  PromptBundle bundle;
  for (const auto* key : {"base", "connector"}) {
    if (!document.contains(key)) continue;
    if (!document[key].is_string() || document[key].get<std::string>().empty())
      throw InvalidInputError(std::string("prompt file field '") + key + "' must be a non-empty string");
  }
  bundle.base = document.value("base", bundle.base);
  bundle.connector = document.value("connector", bundle.connector);
  return bundle;
}

std::string render_prompt(const PromptBundle& bundle) {
  if (bundle.mode == PromptMode::base) return bundle.base;
  std::string out;
  out.reserve(bundle.base.size() + bundle.connector.size() + bundle.context_json.size() + 2);
  out += bundle.base;
  out += '\n';
  out += bundle.connector;
  out += '\n';
  out += bundle.context_json;
  return out;
}

void require_valid(const TokenBudget& budget) {
  if (budget.max_tokens <= 0) throw InvalidInputError("max_tokens must be positive");
  if (!(budget.chars_per_token > 0.0)) throw InvalidInputError("chars_per_token must be positive");
}

BudgetCheck check_budget(std::string_view prompt, const TokenBudget& budget) {
  require_valid(budget);
  const auto chars = static_cast<double>(utf8_length(prompt));
  BudgetCheck check;
  check.estimated_tokens = static_cast<long>(std::ceil(chars / budget.chars_per_token));
  check.fits = check.estimated_tokens <= budget.max_tokens;
  return check;
}

std::string_view to_string(OverflowPolicy policy) noexcept {
  switch (policy) {
    case OverflowPolicy::fail: return "fail";
    case OverflowPolicy::send: return "send";
    case OverflowPolicy::degrade: return "degrade";
  }
  return "fail";
}

OverflowPolicy parse_overflow_policy(std::string_view name) {
  if (name == "fail") return OverflowPolicy::fail;
  if (name == "send") return OverflowPolicy::send;
  if (name == "degrade") return OverflowPolicy::degrade;
  throw InvalidInputError("on-overflow must be fail, send or degrade, got '" + std::string(name) + "'");
}

std::string run_timestamp() {
  std::time_t seconds = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  if (const char* fixed = std::getenv("SOURCE_DATE_EPOCH"); fixed && *fixed) {
    seconds = static_cast<std::time_t>(std::strtoll(fixed, nullptr, 10));
  }
  std::tm utc{};
  gmtime_r(&seconds, &utc);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buffer;
}

RunLog::RunLog(std::filesystem::path path) : path_(std::move(path)) {}

void RunLog::append(const RunRecord& record) {
  nlohmann::ordered_json line = {{"image_id", record.image_id},
                                 {"mode", std::string(to_string(record.mode))},
                                 {"prompt_sha256", record.prompt_sha256},
                                 {"estimated_tokens", record.estimated_tokens},
                                 {"response", record.response},
                                 {"timestamp", record.timestamp}};
  const auto text = line.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace) + "\n";
  std::lock_guard lock(mutex_);
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw InvalidInputError("cannot open run log " + path_.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

Generation MllmBackend::generate(const ImagePayload& image, std::string_view prompt) {
  auto g = comicpipe::generate(image, prompt, transport_);
  if (g.reported_token_limit) reported_limit_.store(*g.reported_token_limit);
  return g;
}

std::optional<long> MllmBackend::reported_token_limit() const noexcept {
  const long limit = reported_limit_.load();
  if (limit > 0) return limit;
  return std::nullopt;
}

DescribeResult describe(const ImagePayload& image, const PromptBundle& bundle, MllmBackend& mllm,
                        const DescribeOptions& options) {
  TokenBudget budget = options.budget;
  if (const auto reported = mllm.reported_token_limit()) budget.max_tokens = *reported;

  DescribeResult result;
  result.mode_sent = bundle.mode;
  result.prompt = render_prompt(bundle);
  result.budget = check_budget(result.prompt, budget);

  if (!result.budget.fits) {
    result.overflowed = true;
    const auto detail = "prompt needs ~" + std::to_string(result.budget.estimated_tokens) + " tokens but the limit is " +
                        std::to_string(budget.max_tokens);
    switch (options.on_overflow) {
      case OverflowPolicy::fail:
        throw OverflowError(detail, result.budget.estimated_tokens, budget.max_tokens);
      case OverflowPolicy::send:
        logger()->warn("{}; sending anyway, the model may ignore the context", detail);
        break;
      case OverflowPolicy::degrade:
        if (bundle.mode == PromptMode::enhanced) {
          logger()->warn("{}; degrading to the base prompt", detail);
          PromptBundle base = bundle;
          base.mode = PromptMode::base;
          result.mode_sent = PromptMode::base;
          result.prompt = render_prompt(base);
          result.budget = check_budget(result.prompt, budget);
          if (!result.budget.fits) logger()->warn("base prompt also exceeds the limit; sending anyway");
        } else {
          logger()->warn("{}; base prompt cannot degrade further, sending anyway", detail);
        }
        break;
    }
  }

  const auto prompt_sha = sha256_hex(result.prompt);
  try {
    result.text = mllm.generate(image, result.prompt).text;
  } catch (const BackendError& e) {
    throw GenerationError(prompt_sha, e);
  }

  if (options.run_log) {
    options.run_log->append({options.image_id, result.mode_sent, prompt_sha, result.budget.estimated_tokens,
                             result.text, run_timestamp()});
  }
  return result;
}

}  // namespace comicpipe
