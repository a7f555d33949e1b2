// Copyright 2026 The dialex Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// OpenAI-style chat-completions server for tests. Replies are produced by a
// script that sees the prompt and the zero-based request number.
#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

namespace dialex::testing {

struct MockReply {
  int status = 200;
  std::string content;   // becomes choices[0].message.content
  std::string raw_body;  // sent verbatim when non-empty
  int delay_ms = 0;

  static MockReply text(std::string s) { return {200, std::move(s), {}, 0}; }
  static MockReply error(int status) { return {status, {}, "{\"error\":\"scripted\"}", 0}; }
};

class MockChatServer {
 public:
  using Script = std::function<MockReply(const std::string& prompt, std::size_t call)>;

  explicit MockChatServer(Script script) : script_(std::move(script)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const std::size_t call = calls_.fetch_add(1);
      const auto body = nlohmann::json::parse(req.body);
      const auto prompt = body.at("messages").at(0).at("content").get<std::string>();
      {
        std::lock_guard lock(mutex_);
        requests_.push_back(body);
        authorizations_.push_back(req.get_header_value("Authorization"));
      }
      const auto reply = script_(prompt, call);
      if (reply.delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(reply.delay_ms));
      res.status = reply.status;
      if (!reply.raw_body.empty()) {
        res.set_content(reply.raw_body, "application/json");
        return;
      }
      nlohmann::json out = {
          {"id", "mock-" + std::to_string(call)},
          {"object", "chat.completion"},
          {"model", body.value("model", "")},
          {"choices", {{{"index", 0},
                        {"message", {{"role", "assistant"}, {"content", reply.content}}},
                        {"finish_reason", "stop"}}}}};
      res.set_content(out.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    if (port_ <= 0) throw std::runtime_error("mock server could not bind");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~MockChatServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  MockChatServer(const MockChatServer&) = delete;
  MockChatServer& operator=(const MockChatServer&) = delete;

  int port() const { return port_; }
  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  std::size_t calls() const { return calls_.load(); }

  std::vector<nlohmann::json> requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
  }

  std::vector<std::string> authorizations() const {
    std::lock_guard lock(mutex_);
    return authorizations_;
  }

 private:
  Script script_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<std::size_t> calls_{0};
  mutable std::mutex mutex_;
  std::vector<nlohmann::json> requests_;
  std::vector<std::string> authorizations_;
};

}  // namespace dialex::testing
