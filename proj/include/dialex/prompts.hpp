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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "dialex/error.hpp"

namespace dialex {

enum class Task { kJudge, kTranslate };

constexpr std::string_view to_string(Task t) { return t == Task::kJudge ? "judge" : "translate"; }

inline std::optional<Task> parse_task(std::string_view s) {
  if (s == "judge" || s == "judgment") return Task::kJudge;
  if (s == "translate" || s == "translation") return Task::kTranslate;
  return std::nullopt;
}

inline constexpr std::string_view kDialectSlot = "term_bar";
inline constexpr std::string_view kStandardSlot = "term_de";
inline constexpr std::string_view kContextSlot = "####";

struct PromptTemplate {
  int id = 0;
  Task task = Task::kJudge;
  std::string language = "en";
  bool with_context = false;
  std::string body;

  // "en", "en+context", "de", ...
  std::string variant() const { return with_context ? language + "+context" : language; }

  std::string name() const {
    return std::string(to_string(task)) + "/" + variant() + "/" + std::to_string(id);
  }

  auto key() const { return std::tuple(task, language, with_context, id); }
};

inline void validate(const PromptTemplate& t) {
  const auto has = [&](std::string_view slot) { return t.body.find(slot) != std::string::npos; };
  if (!has(kDialectSlot)) throw ValidationError("template " + t.name() + " lacks term_bar");
  if (t.task == Task::kJudge && !has(kStandardSlot)) {
    throw ValidationError("template " + t.name() + " lacks term_de");
  }
  if (t.task == Task::kTranslate && has(kStandardSlot)) {
    throw ValidationError("template " + t.name() + " must not reveal term_de");
  }
  if (t.with_context != has(kContextSlot)) {
    throw ValidationError("template " + t.name() +
                          (t.with_context ? " lacks the #### context slot" : " has a #### slot but no context flag"));
  }
}

// Front matter between two "---" lines, then the body verbatim. The one
// newline that ends the file is not part of the body.
inline PromptTemplate parse_template(std::string_view text, std::string_view source = "<memory>") {
  const auto fail = [&](const std::string& msg) {
    return ValidationError(std::string(source) + ": " + msg);
  };
  if (!text.starts_with("---\n")) throw fail("missing front matter");
  const auto end = text.find("\n---\n", 3);
  if (end == std::string_view::npos) throw fail("unterminated front matter");
  PromptTemplate t;
  bool seen_id = false, seen_task = false;
  std::istringstream header(std::string(text.substr(4, end - 3)));
  std::string line;
  while (std::getline(header, line)) {
    if (line.empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw fail("bad front matter line '" + line + "'");
    const auto key = line.substr(0, colon);
    auto value = line.substr(colon + 1);
    value.erase(0, value.find_first_not_of(' '));
    value.erase(value.find_last_not_of(' ') + 1);
    if (key == "id") {
      try {
        std::size_t used = 0;
        t.id = std::stoi(value, &used);
        if (used != value.size() || t.id < 0) throw std::invalid_argument(value);
      } catch (const std::exception&) {
        throw fail("bad id '" + value + "'");
      }
      seen_id = true;
    } else if (key == "task") {
      auto task = parse_task(value);
      if (!task) throw fail("bad task '" + value + "'");
      t.task = *task;
      seen_task = true;
    } else if (key == "language") {
      if (value.empty()) throw fail("empty language");
      t.language = value;
    } else if (key == "with_context") {
      if (value != "true" && value != "false") throw fail("with_context must be true or false");
      t.with_context = value == "true";
    } else {
      throw fail("unknown front matter key '" + key + "'");
    }
  }
  if (!seen_id || !seen_task) throw fail("front matter needs id and task");
  t.body = std::string(text.substr(end + 5));
  if (t.body.ends_with('\n')) t.body.pop_back();
  validate(t);
  return t;
}

inline PromptTemplate load_template(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DependencyError(path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_template(text, path.string());
}

// Every *.txt file in `dir`, sorted by (task, language, with_context, id).
inline std::vector<PromptTemplate> load_prompt_pool(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw DependencyError(dir.string());
  }
  std::vector<PromptTemplate> pool;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      pool.push_back(load_template(entry.path()));
    }
  }
  std::sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) { return a.key() < b.key(); });
  for (std::size_t i = 1; i < pool.size(); ++i) {
    if (pool[i].key() == pool[i - 1].key()) throw ValidationError("duplicate template " + pool[i].name());
  }
  return pool;
}

inline std::vector<PromptTemplate> filter_pool(std::span<const PromptTemplate> pool, Task task,
                                               std::string_view language, bool with_context) {
  std::vector<PromptTemplate> out;
  for (const auto& t : pool) {
    if (t.task == task && t.language == language && t.with_context == with_context) out.push_back(t);
  }
  return out;
}

inline const PromptTemplate& find_template(std::span<const PromptTemplate> pool, Task task,
                                           std::string_view language, bool with_context, int id) {
  for (const auto& t : pool) {
    if (t.task == task && t.language == language && t.with_context == with_context && t.id == id) return t;
  }
  PromptTemplate probe{id, task, std::string(language), with_context, {}};
  throw NotFoundError("no template " + probe.name());
}

// Single left-to-right pass, so substituted text is never rescanned.
inline std::string render_prompt(const PromptTemplate& t, std::string_view lemma, std::string_view term,
                                 std::optional<std::string_view> context = std::nullopt) {
  if (t.with_context && !context) throw ValidationError("template " + t.name() + " needs a context");
  if (!t.with_context && context) throw ValidationError("template " + t.name() + " takes no context");
  std::string out;
  out.reserve(t.body.size() + term.size() + lemma.size() + (context ? context->size() : 0));
  const std::string_view body = t.body;
  std::size_t i = 0;
  while (i < body.size()) {
    const auto rest = body.substr(i);
    if (rest.starts_with(kDialectSlot)) {
      out += term;
      i += kDialectSlot.size();
    } else if (rest.starts_with(kStandardSlot)) {
      out += lemma;
      i += kStandardSlot.size();
    } else if (context && rest.starts_with(kContextSlot)) {
      out += *context;
      i += kContextSlot.size();
    } else {
      out += body[i++];
    }
  }
  return out;
}

}  // namespace dialex
