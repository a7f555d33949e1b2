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

#pragma once

#include <chrono>
#include <cstdlib>
#include <functional>
#include <string>
#include <string_view>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "dialex/error.hpp"

namespace dialex {

struct ModelEndpointConfig {
  std::string name;                   // config section name
  std::string base_url;               // scheme://host[:port][/prefix]
  std::string path = "/v1/chat/completions";
  std::string model;
  int max_tokens = 20;
  int timeout_ms = 60000;
  int retries = 3;                    // attempts after the first
  int backoff_ms = 500;               // doubled after every failed attempt
  std::string api_key_env;            // name of the variable holding the key
  int concurrency = 4;

  static constexpr double kTemperature = 0.0;

  void validate() const {
    if (base_url.empty()) throw ConfigError("endpoint '" + name + "': base_url is required");
    if (model.empty()) throw ConfigError("endpoint '" + name + "': model is required");
    if (max_tokens <= 0) throw ConfigError("endpoint '" + name + "': max_tokens must be positive");
    if (timeout_ms <= 0) throw ConfigError("endpoint '" + name + "': timeout_ms must be positive");
    if (retries < 0 || backoff_ms < 0) throw ConfigError("endpoint '" + name + "': negative retry setting");
    if (concurrency <= 0) throw ConfigError("endpoint '" + name + "': concurrency must be positive");
  }
};

// Maps a rendered prompt to the raw completion text.
using Completer = std::function<std::string(const std::string& prompt)>;

inline nlohmann::json chat_request_body(const ModelEndpointConfig& cfg, std::string_view prompt) {
  return {{"model", cfg.model},
          {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
          {"temperature", ModelEndpointConfig::kTemperature},
          {"max_tokens", cfg.max_tokens}};
}

inline std::string completion_text(std::string_view body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("response is not JSON: ") + e.what());
  }
  try {
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (content.is_null()) return {};
    return content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("response lacks choices[0].message.content: ") + e.what());
  }
}

class ChatClient {
 public:
  explicit ChatClient(ModelEndpointConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    const auto scheme_end = cfg_.base_url.find("://");
    const auto path_start =
        cfg_.base_url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    if (path_start == std::string::npos) {
      origin_ = cfg_.base_url;
      path_ = cfg_.path;
    } else {
      origin_ = cfg_.base_url.substr(0, path_start);
      auto prefix = cfg_.base_url.substr(path_start);
      while (prefix.ends_with('/')) prefix.pop_back();
      path_ = prefix + cfg_.path;
    }
    if (!cfg_.api_key_env.empty()) {
      const char* key = std::getenv(cfg_.api_key_env.c_str());
      if (!key || !*key) {
        throw ConfigError("endpoint '" + cfg_.name + "': environment variable " + cfg_.api_key_env +
                          " is not set");
      }
      api_key_ = key;
    }
  }

  const ModelEndpointConfig& config() const { return cfg_; }

  // One chat-completion request, retried on connection failures, 429 and 5xx.
  std::string complete(const std::string& prompt) const {
    const std::string body = chat_request_body(cfg_, prompt).dump();
    std::string last_error;
    int delay = cfg_.backoff_ms;
    for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        delay *= 2;
      }
      httplib::Client client(origin_);
      const auto timeout = std::chrono::milliseconds(cfg_.timeout_ms);
      client.set_connection_timeout(timeout);
      client.set_read_timeout(timeout);
      client.set_write_timeout(timeout);
      httplib::Headers headers;
      if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
      auto res = client.Post(path_, headers, body, "application/json");
      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;
      }
      if (res->status == 200) return completion_text(res->body);
      last_error = "HTTP " + std::to_string(res->status);
      if (res->status != 429 && res->status < 500) break;
    }
    throw TransportError("endpoint '" + cfg_.name + "' failed: " + last_error);
  }

  Completer completer() const {
    return [this](const std::string& prompt) { return complete(prompt); };
  }

 private:
  ModelEndpointConfig cfg_;
  std::string origin_;
  std::string path_;
  std::string api_key_;
};

}  // namespace dialex
