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

#include <filesystem>
#include <functional>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "json.hpp"

#include "comicpipe/backends.hpp"

#ifndef COMICPIPE_TEST_FIXTURES
#error "COMICPIPE_TEST_FIXTURES must point at tests/fixtures"
#endif

namespace testing_support {

inline std::filesystem::path fixtures() { return COMICPIPE_TEST_FIXTURES; }

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string chomp(std::string s) {
  while (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

// Transport answering from a callback and keeping every call.
class ScriptedTransport : public comicpipe::Transport {
 public:
  using Handler = std::function<nlohmann::json(std::string_view, const nlohmann::json&)>;
  explicit ScriptedTransport(Handler handler) : handler_(std::move(handler)) {}

  nlohmann::json post(std::string_view route, const nlohmann::json& body) override {
    {
      std::lock_guard lock(mutex_);
      calls_.push_back({std::string(route), body});
    }
    return handler_(route, body);
  }

  struct Call {
    std::string route;
    nlohmann::json body;
  };
  std::vector<Call> calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
  }

 private:
  Handler handler_;
  mutable std::mutex mutex_;
  std::vector<Call> calls_;
};

// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("comicpipe_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_support
