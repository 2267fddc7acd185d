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

#include <cstdlib>
#include <sstream>

#include "comicpipe/cli.hpp"
#include "support/fakes.hpp"

using namespace comicpipe;
using nlohmann::json;
using testing_support::chomp;
using testing_support::fixtures;
using testing_support::read_text;
using testing_support::TempDir;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "comicpipe");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string strip() { return (fixtures() / "dilbert" / "strip.png").string(); }
std::string config() { return (fixtures() / "dilbert" / "config.json").string(); }

}  // namespace

TEST(Cli, Version) {
  const auto r = run({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("comicpipe 1.0.0"), std::string::npos);
}

TEST(Cli, UnknownSubcommandIsUsageError) { EXPECT_EQ(run({"frobnicate"}).code, kExitError); }

TEST(Cli, PanelsOnStrip) {
  const auto r = run({"panels", strip()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  ASSERT_EQ(j["panels"].size(), 3u);
  EXPECT_LT(j["panels"][0][0].get<int>(), j["panels"][1][0].get<int>());
}

TEST(Cli, PanelsFallBackToWholeImage) {
  const auto r = run({"panels", strip(), "--min-area-frac", "0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["panels"], json::parse("[[0, 0, 900, 300]]"));
}

TEST(Cli, ContextMatchesGolden) {
  const auto r = run({"context", strip(), "--config", config()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, read_text(fixtures() / "dilbert" / "context.golden.json"));
}

TEST(Cli, DescribeEnhancedAndBase) {
  TempDir dir("cli_describe");
  const auto log = (dir / "run.jsonl").string();
  const auto ctx = (dir / "ctx.json").string();
  auto r = run({"describe", strip(), "--config", config(), "--run-log", log, "--context-out", ctx});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, read_text(fixtures() / "dilbert" / "description.enhanced.golden.txt"));
  EXPECT_EQ(read_text(ctx), read_text(fixtures() / "dilbert" / "context.golden.json"));

  r = run({"describe", strip(), "--config", config(), "--run-log", log, "--mode", "base"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, read_text(fixtures() / "dilbert" / "description.base.golden.txt"));

  std::istringstream lines(read_text(log));
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    const auto entry = json::parse(line);
    EXPECT_EQ(entry["image_id"], "strip");
    ++n;
  }
  EXPECT_EQ(n, 2);
}

TEST(Cli, ExitCodes) {
  TempDir dir("cli_codes");
  const auto log = (dir / "run.jsonl").string();
  EXPECT_EQ(run({"describe", strip(), "--config", config(), "--run-log", log, "--series", "calvin"}).code, kExitError);
  EXPECT_EQ(run({"describe", (dir / "missing.png").string(), "--config", config(), "--run-log", log}).code,
            kExitDecode);
  {
    std::ofstream bad(dir / "bad.png");
    bad << "not an image";
  }
  EXPECT_EQ(run({"panels", (dir / "bad.png").string()}).code, kExitDecode);
  // The detector fixture has no entry for this image.
  const auto garfield = (fixtures() / "garfield" / "crop.png").string();
  const auto miss = run({"describe", garfield, "--config", config(), "--run-log", log});
  EXPECT_EQ(miss.code, kExitBackend);
  EXPECT_NE(miss.err.find("no fixture entry"), std::string::npos) << miss.err;
  EXPECT_EQ(run({"describe", strip(), "--config", config(), "--run-log", log, "--max-tokens", "100"}).code,
            kExitOverflow);
  EXPECT_EQ(run({"describe", strip(), "--config", config(), "--run-log", log, "--mode", "fancy"}).code, kExitError);
}

TEST(Cli, DetectThenEval) {
  TempDir dir("cli_eval");
  const auto det = run({"identify", strip(), "--config", config()});
  ASSERT_EQ(det.code, 0) << det.err;
  {
    std::ofstream f(dir / "pred.json");
    f << det.out;
  }
  const auto gt = (fixtures() / "dilbert" / "annotations.json").string();
  auto r = run({"eval", "detections", "--gt", gt, "--pred", (dir / "pred.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_DOUBLE_EQ(json::parse(r.out)["map"].get<double>(), 1.0);
  r = run({"eval", "identity", "--gt", gt, "--pred", (dir / "pred.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_DOUBLE_EQ(json::parse(r.out)["f1"].get<double>(), 1.0);
  r = run({"eval", "detections", "--gt", gt, "--pred", (dir / "pred.json").string(), "--format", "table"});
  EXPECT_NE(r.out.find("character"), std::string::npos);
  EXPECT_EQ(run({"eval", "detections", "--gt", gt, "--pred", (dir / "nope.json").string()}).code, kExitError);
}

TEST(Cli, BatchDescribe) {
  TempDir in("cli_batch_in"), out("cli_batch_out");
  std::filesystem::copy_file(strip(), in / "b.png");
  std::filesystem::copy_file(strip(), in / "a.png");
  {
    std::ofstream junk(in / "c.png");
    junk << "junk";
  }
  const auto r = run({"describe", "--config", config(), "--input-dir", in.path().string(), "--out-dir",
                      out.path().string(), "--jobs", "3"});
  EXPECT_EQ(r.code, kExitDecode);
  std::istringstream lines(r.out);
  std::string a, b, c;
  std::getline(lines, a);
  std::getline(lines, b);
  std::getline(lines, c);
  EXPECT_EQ(a, "a\tok");
  EXPECT_EQ(b, "b\tok");
  EXPECT_EQ(c.rfind("c\terror:", 0), 0u);
  // The image id is the file stem, so the fixture (keyed on the bytes) still answers.
  EXPECT_EQ(read_text(out / "a.description.txt"),
            read_text(fixtures() / "dilbert" / "description.enhanced.golden.txt"));
  EXPECT_EQ(read_text(out / "b.context.json"), read_text(fixtures() / "dilbert" / "context.golden.json"));
  EXPECT_TRUE(std::filesystem::exists(out / "run_log.jsonl"));
  EXPECT_FALSE(std::filesystem::exists(out / "c.description.txt"));
}

TEST(Cli, ConfigFromEnvironmentAndFlagOverride) {
  ::setenv("COMICPIPE_CONFIG", config().c_str(), 1);
  const auto r = run({"context", strip()});
  const auto overridden = run({"context", strip(), "--series", "peanuts"});
  ::unsetenv("COMICPIPE_CONFIG");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, read_text(fixtures() / "dilbert" / "context.golden.json"));
  // Different candidate list, so the classifier fixture has no answer.
  EXPECT_EQ(overridden.code, kExitBackend);
}

TEST(Cli, GenSynthetic) {
  TempDir dir("cli_synth");
  const auto r = run({"gen-synthetic", "--out", dir.path().string(), "--count", "4", "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(read_text(dir / "ground_truth.json")).size(), 4u);
}
