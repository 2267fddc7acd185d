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

#include <httplib.h>

#include <atomic>
#include <chrono>
#include <thread>

#include "comicpipe/backends.hpp"
#include "comicpipe/errors.hpp"

using namespace comicpipe;
using nlohmann::json;

namespace {

// Local server on an ephemeral port, stopped on destruction.
class LocalServer {
 public:
  LocalServer() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  httplib::Server& server() { return server_; }
  std::string url(const std::string& prefix = "") const { return "http://127.0.0.1:" + std::to_string(port_) + prefix; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

BackendEndpoint endpoint(const std::string& url, int retries = 2, int timeout_ms = 2000) {
  BackendEndpoint e;
  e.role = BackendRole::ocr;
  e.url = url;
  e.max_retries = retries;
  e.timeout_ms = timeout_ms;
  return e;
}

ImagePayload small() { return to_payload(RasterImage(8, 8, 1, 255)); }

}  // namespace

TEST(HttpTransport, PostsJsonWithPrefixAndBearer) {
  LocalServer s;
  std::string seen_auth, seen_type;
  json seen_body;
  s.server().Post("/api/v1/ocr", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    seen_type = req.get_header_value("Content-Type");
    seen_body = json::parse(req.body);
    res.set_content(R"({"lines": [{"text": "B", "box": [0, 5, 4, 7]}, {"text": "A", "box": [0, 0, 4, 2]}]})",
                    "application/json");
  });
  auto e = endpoint(s.url("/api/"));
  e.bearer_token = "secret";
  HttpTransport t(e);
  const auto r = ocr(small(), t);
  ASSERT_EQ(r.lines.size(), 2u);
  EXPECT_EQ(r.lines[0].text, "A");
  EXPECT_EQ(seen_auth, "Bearer secret");
  EXPECT_EQ(seen_type, "application/json");
  EXPECT_EQ(base64_decode(seen_body["image_b64"].get<std::string>()), small().bytes);
}

TEST(HttpTransport, ErrorBodyCodeSurfacesWithoutRetry) {
  LocalServer s;
  std::atomic<int> hits{0};
  s.server().Post("/v1/ocr", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 400;
    res.set_content(R"({"error": {"code": "bad_image", "message": "cannot decode"}})", "application/json");
  });
  HttpTransport t(endpoint(s.url()));
  try {
    ocr(small(), t);
    FAIL() << "expected BackendError";
  } catch (const BackendUnavailableError&) {
    FAIL() << "4xx must not count as unavailable";
  } catch (const BackendError& e) {
    EXPECT_EQ(e.code(), "bad_image");
    EXPECT_NE(std::string(e.what()).find("cannot decode"), std::string::npos);
  }
  EXPECT_EQ(hits.load(), 1);
}

TEST(HttpTransport, TransientStatusRetriedThenSucceeds) {
  LocalServer s;
  std::atomic<int> hits{0};
  s.server().Post("/v1/ocr", [&](const httplib::Request&, httplib::Response& res) {
    if (++hits < 3) {
      res.status = 503;
      res.set_content(R"({"error": {"code": "loading", "message": "model loading"}})", "application/json");
      return;
    }
    res.set_content(R"({"lines": []})", "application/json");
  });
  HttpTransport t(endpoint(s.url(), 2));
  EXPECT_TRUE(ocr(small(), t).lines.empty());
  EXPECT_EQ(hits.load(), 3);
}

TEST(HttpTransport, RetriesExhaustedIsUnavailable) {
  LocalServer s;
  std::atomic<int> hits{0};
  s.server().Post("/v1/ocr", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 503;
  });
  HttpTransport t(endpoint(s.url(), 1));
  EXPECT_THROW(ocr(small(), t), BackendUnavailableError);
  EXPECT_EQ(hits.load(), 2);
}

TEST(HttpTransport, ConnectionRefusedIsUnavailable) {
  int port;
  {
    LocalServer s;  // grab a port, then free it
    port = std::stoi(s.url().substr(s.url().rfind(':') + 1));
  }
  HttpTransport t(endpoint("http://127.0.0.1:" + std::to_string(port), 1, 500));
  EXPECT_THROW(ocr(small(), t), BackendUnavailableError);
}

TEST(HttpTransport, TimeoutIsUnavailable) {
  LocalServer s;
  s.server().Post("/v1/ocr", [&](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(600));
    res.set_content(R"({"lines": []})", "application/json");
  });
  HttpTransport t(endpoint(s.url(), 0, 150));
  EXPECT_THROW(ocr(small(), t), BackendUnavailableError);
}

TEST(HttpTransport, NonJsonSuccessIsProtocolErrorWithoutRetry) {
  LocalServer s;
  std::atomic<int> hits{0};
  s.server().Post("/v1/ocr", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.set_content("<html>hello</html>", "text/html");
  });
  HttpTransport t(endpoint(s.url()));
  EXPECT_THROW(ocr(small(), t), ProtocolError);
  EXPECT_EQ(hits.load(), 1);
}

TEST(HttpTransport, SchemaViolationIsProtocolError) {
  LocalServer s;
  s.server().Post("/v1/ocr", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"lines": [{"text": "x", "box": [5, 5, 1, 1]}]})", "application/json");
  });
  HttpTransport t(endpoint(s.url()));
  EXPECT_THROW(ocr(small(), t), ProtocolError);
}

TEST(HttpTransport, ConcurrentCalls) {
  LocalServer s;
  s.server().Post("/v1/generate", [&](const httplib::Request& req, httplib::Response& res) {
    const auto body = json::parse(req.body);
    res.set_content(json{{"text", "re:" + body["prompt"].get<std::string>()}}.dump(), "application/json");
  });
  auto e = endpoint(s.url());
  e.role = BackendRole::mllm;
  HttpTransport t(e);
  std::vector<std::string> out(12);
  {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < out.size(); ++i)
      pool.emplace_back([&, i] { out[i] = generate(small(), "p" + std::to_string(i), t).text; });
  }
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], "re:p" + std::to_string(i));
}
