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

#include <openssl/evp.h>

#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "dialex/annotation_store.hpp"
#include "dialex/error.hpp"

namespace dialex {

inline std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xf];
  }
  return out;
}

inline std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DependencyError(path.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(data);
}

// Provenance of one stage run. The hash covers everything except timestamps.
struct RunManifest {
  std::string stage;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::map<std::string, std::string> inputs;   // path -> sha256
  std::map<std::string, std::string> outputs;  // path -> sha256
  std::string started_at;
  std::string finished_at;

  void add_input(const std::filesystem::path& p) { inputs[p.string()] = sha256_file(p); }
  void add_output(const std::filesystem::path& p) { outputs[p.string()] = sha256_file(p); }

  std::string hash() const {
    nlohmann::ordered_json j = {{"stage", stage}, {"config", config}, {"inputs", inputs}, {"outputs", outputs}};
    return sha256_hex(j.dump());
  }

  nlohmann::ordered_json to_json() const {
    return {{"stage", stage},           {"manifest_hash", hash()}, {"config", config},
            {"inputs", inputs},         {"outputs", outputs},      {"started_at", started_at},
            {"finished_at", finished_at}};
  }
};

inline std::filesystem::path manifest_path(const std::filesystem::path& artifact) {
  return artifact.string() + ".manifest.json";
}

// Writes the manifest next to every output artifact.
inline void write_manifests(RunManifest& m) {
  if (m.finished_at.empty()) m.finished_at = utc_timestamp();
  const auto text = m.to_json().dump(2) + "\n";
  for (const auto& [path, sum] : m.outputs) {
    std::ofstream out(manifest_path(path), std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write manifest for " + path);
    out << text;
  }
}

}  // namespace dialex
