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
#include <map>
#include <optional>
#include <string>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "dialex/baselines.hpp"
#include "dialex/chat_client.hpp"
#include "dialex/corpus.hpp"
#include "dialex/error.hpp"
#include "dialex/matcher.hpp"
#include "dialex/vocab.hpp"

namespace dialex {

struct PathsConfig {
  std::filesystem::path work_dir = "work";
  std::filesystem::path standard_corpus;
  std::filesystem::path dialect_corpus;
  std::filesystem::path prompts = "data/prompts";
};

struct AppConfig {
  PathsConfig paths;
  PipelineConfig pipeline;
  DialectFormat dialect_format = DialectFormat::kWikiExtract;
  IndexKind index = IndexKind::kLengthBanded;
  bool fold_case_filter = false;
  std::size_t dev_size = 300;
  unsigned threads = 1;
  LogRegParams logreg;
  std::map<std::string, ModelEndpointConfig> endpoints;

  const ModelEndpointConfig& endpoint(const std::string& name) const {
    auto it = endpoints.find(name);
    if (it == endpoints.end()) throw ConfigError("no [endpoint." + name + "] section in the config");
    return it->second;
  }
};

inline std::optional<IndexKind> parse_index_kind(std::string_view s) {
  if (s == "length-banded") return IndexKind::kLengthBanded;
  if (s == "bk-tree") return IndexKind::kBkTree;
  return std::nullopt;
}

constexpr std::string_view to_string(IndexKind k) {
  return k == IndexKind::kBkTree ? "bk-tree" : "length-banded";
}

namespace detail {

inline std::string unquote(std::string v) {
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') || (v.front() == '\'' && v.back() == '\''))) {
    return v.substr(1, v.size() - 2);
  }
  return v;
}

template <typename T>
void read_value(const boost::property_tree::ptree& section, const std::string& section_name, const char* key,
                T& out) {
  auto v = section.get_optional<std::string>(key);
  if (!v) return;
  const std::string s = unquote(*v);
  try {
    if constexpr (std::is_same_v<T, std::string>) {
      out = s;
    } else if constexpr (std::is_same_v<T, std::filesystem::path>) {
      out = s;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (s == "true") {
        out = true;
      } else if (s == "false") {
        out = false;
      } else {
        throw std::invalid_argument(s);
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      std::size_t used = 0;
      out = static_cast<T>(std::stod(s, &used));
      if (used != s.size()) throw std::invalid_argument(s);
    } else {
      std::size_t used = 0;
      if (!s.empty() && s.front() == '-' && std::is_unsigned_v<T>) throw std::invalid_argument(s);
      const auto parsed = std::stoll(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      out = static_cast<T>(parsed);
    }
  } catch (const std::logic_error&) {
    throw ConfigError("[" + section_name + "] " + key + ": invalid value '" + s + "'");
  }
}

}  // namespace detail

// INI/TOML-style file: [paths], [pipeline], [baselines] and one
// [endpoint.NAME] section per model endpoint. Unknown sections are errors.
inline AppConfig parse_config(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  AppConfig cfg;
  for (const auto& [name, section] : tree) {
    if (section.empty() && !section.data().empty()) {
      throw ConfigError("config: key '" + name + "' outside of a section");
    }
    if (name == "paths") {
      detail::read_value(section, name, "work_dir", cfg.paths.work_dir);
      detail::read_value(section, name, "standard_corpus", cfg.paths.standard_corpus);
      detail::read_value(section, name, "dialect_corpus", cfg.paths.dialect_corpus);
      detail::read_value(section, name, "prompts", cfg.paths.prompts);
      std::string format;
      detail::read_value(section, name, "dialect_format", format);
      if (!format.empty()) {
        auto f = parse_dialect_format(format);
        if (!f) throw ConfigError("[paths] dialect_format: unknown format '" + format + "'");
        cfg.dialect_format = *f;
      }
    } else if (name == "pipeline") {
      detail::read_value(section, name, "n", cfg.pipeline.n);
      detail::read_value(section, name, "k", cfg.pipeline.k);
      detail::read_value(section, name, "contexts", cfg.pipeline.c);
      detail::read_value(section, name, "window", cfg.pipeline.window);
      detail::read_value(section, name, "seed", cfg.pipeline.seed);
      detail::read_value(section, name, "dev_size", cfg.dev_size);
      detail::read_value(section, name, "threads", cfg.threads);
      detail::read_value(section, name, "fold_case_filter", cfg.fold_case_filter);
      std::string index;
      detail::read_value(section, name, "index", index);
      if (!index.empty()) {
        auto k = parse_index_kind(index);
        if (!k) throw ConfigError("[pipeline] index: unknown index '" + index + "'");
        cfg.index = *k;
      }
    } else if (name == "baselines") {
      detail::read_value(section, name, "learning_rate", cfg.logreg.learning_rate);
      detail::read_value(section, name, "max_iterations", cfg.logreg.max_iterations);
      detail::read_value(section, name, "l2", cfg.logreg.l2);
    } else if (name.starts_with("endpoint.")) {
      ModelEndpointConfig ep;
      ep.name = name.substr(9);
      if (ep.name.empty()) throw ConfigError("endpoint section needs a name");
      if (section.get_optional<std::string>("api_key")) {
        throw ConfigError("[" + name + "] API keys are read from the environment; use api_key_env");
      }
      detail::read_value(section, name, "base_url", ep.base_url);
      detail::read_value(section, name, "path", ep.path);
      detail::read_value(section, name, "model", ep.model);
      detail::read_value(section, name, "max_tokens", ep.max_tokens);
      detail::read_value(section, name, "timeout_ms", ep.timeout_ms);
      detail::read_value(section, name, "retries", ep.retries);
      detail::read_value(section, name, "backoff_ms", ep.backoff_ms);
      detail::read_value(section, name, "api_key_env", ep.api_key_env);
      detail::read_value(section, name, "concurrency", ep.concurrency);
      double temperature = 0.0;
      detail::read_value(section, name, "temperature", temperature);
      if (temperature != 0.0) {
        throw ConfigError("[" + name + "] temperature is fixed at 0");
      }
      ep.validate();
      cfg.endpoints.emplace(ep.name, std::move(ep));
    } else {
      throw ConfigError("config: unknown section [" + name + "]");
    }
  }
  cfg.pipeline.validate();
  return cfg;
}

inline AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  return parse_config(in);
}

inline nlohmann::ordered_json to_json(const AppConfig& c) {
  nlohmann::ordered_json j;
  j["paths"] = {{"work_dir", c.paths.work_dir.string()},
                {"standard_corpus", c.paths.standard_corpus.string()},
                {"dialect_corpus", c.paths.dialect_corpus.string()},
                {"prompts", c.paths.prompts.string()},
                {"dialect_format", c.dialect_format == DialectFormat::kPlainLines ? "plain-lines" : "wiki-extract"}};
  j["pipeline"] = {{"n", c.pipeline.n},       {"k", c.pipeline.k},          {"contexts", c.pipeline.c},
                   {"window", c.pipeline.window}, {"seed", c.pipeline.seed},   {"index", to_string(c.index)},
                   {"fold_case_filter", c.fold_case_filter}, {"dev_size", c.dev_size}};
  j["baselines"] = {{"learning_rate", c.logreg.learning_rate},
                    {"max_iterations", c.logreg.max_iterations},
                    {"l2", c.logreg.l2}};
  auto& eps = j["endpoints"] = nlohmann::ordered_json::object();
  for (const auto& [name, ep] : c.endpoints) {
    eps[name] = {{"base_url", ep.base_url},   {"path", ep.path},           {"model", ep.model},
                 {"max_tokens", ep.max_tokens}, {"timeout_ms", ep.timeout_ms}, {"retries", ep.retries},
                 {"backoff_ms", ep.backoff_ms}, {"api_key_env", ep.api_key_env}, {"concurrency", ep.concurrency}};
  }
  return j;
}

}  // namespace dialex
