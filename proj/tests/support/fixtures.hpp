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

#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dialex/dataset.hpp"

#ifndef DIALEX_SOURCE_DIR
#error "DIALEX_SOURCE_DIR must be defined by the build"
#endif

namespace dialex::testing {

inline std::filesystem::path source_dir() { return DIALEX_SOURCE_DIR; }
inline std::filesystem::path data_path(const std::string& name) { return source_dir() / "tests" / "data" / name; }
inline std::filesystem::path golden_path(const std::string& name) { return source_dir() / "tests" / "golden" / name; }
inline std::filesystem::path prompts_dir() { return source_dir() / "data" / "prompts"; }

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    const auto base = std::filesystem::temp_directory_path();
    for (;;) {
      path_ = base / ("dialex-test-" + std::to_string(rd()));
      if (std::filesystem::create_directory(path_)) break;
    }
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline DatasetItem make_item(std::string id, std::string lemma, std::string term, std::size_t distance,
                             std::optional<Label> gold = std::nullopt, Pos pos = Pos::NOUN,
                             Split split = Split::kUnassigned) {
  DatasetItem it;
  it.pair_id = std::move(id);
  it.lemma = std::move(lemma);
  it.term = std::move(term);
  it.distance = distance;
  it.gold = gold;
  it.pos_max = pos;
  it.split = split;
  return it;
}

}  // namespace dialex::testing
