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

#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "dialex/chat_client.hpp"
#include "dialex/dataset.hpp"
#include "dialex/error.hpp"
#include "dialex/metrics.hpp"
#include "dialex/prompts.hpp"
#include "dialex/unicode.hpp"

namespace dialex {

// Bumped whenever the normalization rules below change, so that reported
// IF-error rates can be traced to the parser that produced them.
inline constexpr std::string_view kParserVersion = "1";
inline constexpr std::string_view kIfError = "IF_ERROR";

namespace detail {

inline bool is_quote(char32_t c) {
  switch (c) {
    case U'\'': case U'"': case U'`': case U'‘': case U'’': case U'‚': case U'“':
    case U'”': case U'„': case U'«': case U'»': case U'‹': case U'›':
      return true;
    default:
      return false;
  }
}

inline bool is_final_punct(char32_t c) {
  return c == U'.' || c == U',' || c == U'!' || c == U'?' || c == U';' || c == U':' || c == U'。';
}

inline std::u32string_view trim_space(std::u32string_view s) {
  while (!s.empty() && unicode::is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && unicode::is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::u32string_view strip_quotes(std::u32string_view s) {
  while (s.size() >= 2 && is_quote(s.front()) && is_quote(s.back())) {
    s = trim_space(s.substr(1, s.size() - 2));
  }
  return s;
}

}  // namespace detail

struct ParsedJudgment {
  std::optional<Label> outcome;  // nullopt: IF error
  std::string raw;
};

struct ParsedTranslation {
  std::optional<std::string> outcome;  // nullopt: IF error
  std::string raw;
};

// Trim, drop at most one trailing punctuation mark and any surrounding
// quotes, lowercase; the result must be exactly one of the three labels.
inline ParsedJudgment parse_judgment(std::string_view raw) {
  ParsedJudgment p{std::nullopt, std::string(raw)};
  std::u32string cps;
  try {
    cps = unicode::decode(raw);
  } catch (const DecodeError&) {
    return p;
  }
  auto s = detail::trim_space(cps);
  bool dropped = false;
  if (!s.empty() && detail::is_final_punct(s.back())) {
    s.remove_suffix(1);
    dropped = true;
  }
  s = detail::strip_quotes(detail::trim_space(s));
  if (!dropped && !s.empty() && detail::is_final_punct(s.back())) s.remove_suffix(1);
  s = detail::trim_space(s);
  std::string word;
  for (char32_t c : s) {
    if (c >= 0x80) return p;
    word += static_cast<char>(c >= U'A' && c <= U'Z' ? c - U'A' + U'a' : c);
  }
  p.outcome = parse_label(word);
  return p;
}

// Trim, drop surrounding quotes and a final period; exactly one
// whitespace-free token must remain.
inline ParsedTranslation parse_translation(std::string_view raw) {
  ParsedTranslation p{std::nullopt, std::string(raw)};
  std::u32string cps;
  try {
    cps = unicode::decode(raw);
  } catch (const DecodeError&) {
    return p;
  }
  auto s = detail::strip_quotes(detail::trim_space(cps));
  if (!s.empty() && s.back() == U'.') s = detail::strip_quotes(detail::trim_space(s.substr(0, s.size() - 1)));
  if (s.empty()) return p;
  for (char32_t c : s) {
    if (unicode::is_space(c)) return p;
  }
  p.outcome = unicode::encode(s);
  return p;
}

struct Prediction {
  std::string pair_id;
  std::string model;
  int template_id = 0;
  std::string variant;
  std::string raw;
  std::string outcome;  // label, translated word or IF_ERROR
  double latency_ms = 0.0;

  bool if_error() const { return outcome == kIfError; }
  bool operator==(const Prediction&) const = default;
};

inline std::string outcome_string(Task task, std::string_view raw) {
  if (task == Task::kJudge) {
    const auto p = parse_judgment(raw);
    return p.outcome ? std::string(to_string(*p.outcome)) : std::string(kIfError);
  }
  const auto p = parse_translation(raw);
  return p.outcome ? *p.outcome : std::string(kIfError);
}

inline nlohmann::ordered_json to_json(const Prediction& p) {
  return {{"pair_id", p.pair_id}, {"model", p.model},   {"template_id", p.template_id}, {"variant", p.variant},
          {"raw", p.raw},         {"outcome", p.outcome}, {"latency_ms", p.latency_ms}};
}

inline Prediction prediction_from_json(const nlohmann::json& j, std::size_t line_no) {
  try {
    return {j.at("pair_id").get<std::string>(), j.at("model").get<std::string>(), j.at("template_id").get<int>(),
            j.at("variant").get<std::string>(), j.at("raw").get<std::string>(),   j.at("outcome").get<std::string>(),
            j.at("latency_ms").get<double>()};
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(line_no, std::string("prediction record: ") + e.what());
  }
}

inline void write_predictions_jsonl(std::ostream& out, std::span<const Prediction> preds) {
  for (const auto& p : preds) out << to_json(p).dump() << '\n';
}

inline std::vector<Prediction> read_predictions_jsonl(std::istream& in) {
  std::vector<Prediction> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    out.push_back(prediction_from_json(j, line_no));
  }
  return out;
}

inline JudgmentPredictions judgment_predictions(std::span<const Prediction> preds) {
  JudgmentPredictions out;
  for (const auto& p : preds) {
    if (p.if_error()) {
      out[p.pair_id] = std::nullopt;
      continue;
    }
    auto label = parse_label(p.outcome);
    if (!label) throw ValidationError("prediction for " + p.pair_id + " has outcome '" + p.outcome + "'");
    out[p.pair_id] = label;
  }
  return out;
}

inline TranslationPredictions translation_predictions(std::span<const Prediction> preds) {
  TranslationPredictions out;
  for (const auto& p : preds) {
    out[p.pair_id] = p.if_error() ? std::nullopt : std::optional<std::string>(p.outcome);
  }
  return out;
}

struct CacheKey {
  std::string model;
  Task task = Task::kJudge;
  int template_id = 0;
  std::string variant;
  std::string pair_id;

  std::string str() const {
    return model + '\x1f' + std::string(to_string(task)) + '\x1f' + std::to_string(template_id) + '\x1f' + variant +
           '\x1f' + pair_id;
  }
};

struct CachedResponse {
  std::string raw;
  double latency_ms = 0.0;
};

// Raw completions keyed by (model, task, template id, variant, pair_id),
// persisted as an append-only JSONL file.
class ResponseCache {
 public:
  ResponseCache() = default;

  explicit ResponseCache(std::filesystem::path path) : path_(std::move(path)) {
    std::ifstream in(path_, std::ios::binary);
    std::uintmax_t good = 0;
    bool torn = false;
    if (in) {
      std::string line;
      while (std::getline(in, line)) {
        if (in.eof()) {  // unterminated tail from an interrupted write
          torn = true;
          break;
        }
        good += line.size() + 1;
        if (line.empty()) continue;
        try {
          const auto j = nlohmann::json::parse(line);
          CacheKey k{j.at("model").get<std::string>(), *parse_task(j.at("task").get<std::string>()),
                     j.at("template_id").get<int>(), j.at("variant").get<std::string>(),
                     j.at("pair_id").get<std::string>()};
          entries_[k.str()] = {j.at("raw").get<std::string>(), j.at("latency_ms").get<double>()};
        } catch (const std::exception&) {
          continue;
        }
      }
      in.close();
      if (torn) std::filesystem::resize_file(path_, good);
    }
    if (path_.has_parent_path()) {
      std::error_code ec;
      std::filesystem::create_directories(path_.parent_path(), ec);
    }
    out_.open(path_, std::ios::binary | std::ios::app);
    if (!out_) throw Error("cannot open response cache " + path_.string());
  }

  std::optional<CachedResponse> get(const CacheKey& key) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(key.str());
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  void put(const CacheKey& key, const CachedResponse& value) {
    std::lock_guard lock(mutex_);
    entries_[key.str()] = value;
    if (!out_.is_open()) return;
    nlohmann::ordered_json j = {{"model", key.model},         {"task", to_string(key.task)},
                                {"template_id", key.template_id}, {"variant", key.variant},
                                {"pair_id", key.pair_id},     {"raw", value.raw},
                                {"latency_ms", value.latency_ms}};
    out_ << j.dump() << '\n';
    out_.flush();
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
  }

 private:
  std::filesystem::path path_;
  std::unordered_map<std::string, CachedResponse> entries_;
  std::ofstream out_;
  mutable std::mutex mutex_;
};

struct RunResult {
  std::vector<Prediction> predictions;  // item order, pending items left out
  std::vector<std::string> pending;     // transport or protocol failures
  std::vector<std::string> errors;      // one message per pending item
  std::size_t network_calls = 0;
  std::size_t cache_hits = 0;

  bool complete() const { return pending.empty(); }
};

inline std::string render_for_item(const PromptTemplate& t, const DatasetItem& item) {
  if (t.with_context) {
    if (item.contexts.empty()) {
      throw ValidationError("item " + item.pair_id + " has no usage context for template " + t.name());
    }
    return render_prompt(t, item.lemma, item.term, std::string_view(item.contexts.front()));
  }
  return render_prompt(t, item.lemma, item.term);
}

// Queries `complete` for every item not yet cached, with up to `concurrency`
// requests in flight. Output order follows `items`.
inline RunResult run_task(Task task, std::span<const DatasetItem> items, const PromptTemplate& tmpl,
                          const std::string& model, const Completer& complete, ResponseCache& cache,
                          int concurrency = 1) {
  if (tmpl.task != task) throw ValidationError("template " + tmpl.name() + " does not fit task " + std::string(to_string(task)));
  std::vector<std::string> prompts;
  prompts.reserve(items.size());
  for (const auto& item : items) prompts.push_back(render_for_item(tmpl, item));

  struct Slot {
    std::optional<CachedResponse> response;
    std::string error;
    bool from_cache = false;
  };
  std::vector<Slot> slots(items.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> calls{0};
  std::exception_ptr fatal;
  std::mutex fatal_mutex;
  const auto work = [&] {
    for (;;) {
      const auto i = next.fetch_add(1);
      if (i >= items.size()) return;
      const CacheKey key{model, task, tmpl.id, tmpl.variant(), items[i].pair_id};
      if (auto hit = cache.get(key)) {
        slots[i].response = std::move(hit);
        slots[i].from_cache = true;
        continue;
      }
      try {
        const auto start = std::chrono::steady_clock::now();
        ++calls;
        auto raw = complete(prompts[i]);
        const std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - start;
        CachedResponse resp{std::move(raw), elapsed.count()};
        cache.put(key, resp);
        slots[i].response = std::move(resp);
      } catch (const TransportError& e) {
        slots[i].error = e.what();
      } catch (const ProtocolError& e) {
        slots[i].error = e.what();
      } catch (...) {
        std::lock_guard lock(fatal_mutex);
        if (!fatal) fatal = std::current_exception();
        next = items.size();
      }
    }
  };
  const auto workers = static_cast<std::size_t>(std::max(1, concurrency));
  if (workers == 1 || items.size() < 2) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(workers, items.size()); ++w) pool.emplace_back(work);
  }
  if (fatal) std::rethrow_exception(fatal);

  RunResult result;
  result.network_calls = calls;
  for (std::size_t i = 0; i < items.size(); ++i) {
    auto& slot = slots[i];
    if (!slot.response) {
      result.pending.push_back(items[i].pair_id);
      result.errors.push_back(slot.error);
      continue;
    }
    if (slot.from_cache) ++result.cache_hits;
    result.predictions.push_back({items[i].pair_id, model, tmpl.id, tmpl.variant(), slot.response->raw,
                                  outcome_string(task, slot.response->raw), slot.response->latency_ms});
  }
  return result;
}

struct TemplateScore {
  int template_id = 0;
  double score = 0.0;
  double if_error_rate = 0.0;
  std::size_t items = 0;
  bool complete = true;
};

struct SelectionResult {
  std::string model;
  Task task = Task::kJudge;
  std::string variant;
  std::vector<TemplateScore> scores;  // ascending template id
  std::optional<int> best_template_id;
};

// Highest score among complete templates; ties go to the lowest id.
inline std::optional<int> best_from_scores(std::span<const TemplateScore> scores) {
  std::optional<int> best;
  double best_score = 0.0;
  for (const auto& s : scores) {
    if (!s.complete) continue;
    if (!best || s.score > best_score || (s.score == best_score && s.template_id < *best)) {
      best = s.template_id;
      best_score = s.score;
    }
  }
  return best;
}

class SelectionIncompleteError : public PartialResultsError {
 public:
  SelectionIncompleteError(SelectionResult partial, std::string token)
      : PartialResultsError("prompt selection incomplete; rerun to resume", std::move(token)),
        partial_(std::move(partial)) {}

  const SelectionResult& partial() const noexcept { return partial_; }

 private:
  SelectionResult partial_;
};

// Scores `items` under one set of predictions: macro-F1 for judgment,
// accuracy over the gold 'yes' items for translation.
inline std::pair<double, double> dev_score(Task task, std::span<const DatasetItem> items,
                                           std::span<const Prediction> preds) {
  if (task == Task::kJudge) {
    const auto r = score_judgment("dev", items, judgment_predictions(preds));
    return {r.overall, r.if_error_rate};
  }
  const auto r = score_translation("dev", items, translation_predictions(preds));
  return {r.overall, r.if_error_rate};
}

inline std::vector<DatasetItem> dev_items_for(Task task, std::span<const DatasetItem> dev) {
  std::vector<DatasetItem> out;
  for (const auto& item : dev) {
    if (!item.gold) continue;
    if (task == Task::kTranslate && *item.gold != Label::kYes) continue;
    out.push_back(item);
  }
  return out;
}

// Evaluates every template of `pool` on the dev items and picks the best.
inline SelectionResult select_best_prompt(std::span<const PromptTemplate> pool, std::span<const DatasetItem> dev,
                                          const std::string& model, const Completer& complete,
                                          ResponseCache& cache, int concurrency = 1) {
  if (pool.empty()) throw ValidationError("prompt pool is empty");
  const Task task = pool.front().task;
  const auto items = dev_items_for(task, dev);
  if (items.empty()) throw ValidationError("no labeled dev items for prompt selection");
  SelectionResult result;
  result.model = model;
  result.task = task;
  result.variant = pool.front().variant();
  std::optional<int> first_incomplete;
  for (const auto& tmpl : pool) {
    if (tmpl.task != task || tmpl.variant() != result.variant) {
      throw ValidationError("prompt pool mixes tasks or variants (" + tmpl.name() + ")");
    }
    const auto run = run_task(task, items, tmpl, model, complete, cache, concurrency);
    TemplateScore s;
    s.template_id = tmpl.id;
    s.items = items.size();
    if (run.complete()) {
      std::tie(s.score, s.if_error_rate) = dev_score(task, items, run.predictions);
    } else {
      s.complete = false;
      if (!first_incomplete) first_incomplete = tmpl.id;
    }
    result.scores.push_back(s);
  }
  std::sort(result.scores.begin(), result.scores.end(),
            [](const auto& a, const auto& b) { return a.template_id < b.template_id; });
  if (first_incomplete) {
    throw SelectionIncompleteError(result, "template:" + std::to_string(*first_incomplete));
  }
  result.best_template_id = best_from_scores(result.scores);
  return result;
}

inline nlohmann::ordered_json to_json(const SelectionResult& r) {
  nlohmann::ordered_json j;
  j["model"] = r.model;
  j["task"] = to_string(r.task);
  j["variant"] = r.variant;
  j["metric"] = r.task == Task::kJudge ? "macro_f1" : "accuracy";
  j["parser_version"] = kParserVersion;
  j["best_template_id"] = r.best_template_id ? nlohmann::ordered_json(*r.best_template_id) : nlohmann::ordered_json();
  j["templates"] = nlohmann::ordered_json::array();
  for (const auto& s : r.scores) {
    j["templates"].push_back({{"template_id", s.template_id},
                              {"score", s.score},
                              {"if_error_rate", s.if_error_rate},
                              {"items", s.items},
                              {"complete", s.complete}});
  }
  return j;
}

inline SelectionResult selection_from_json(const nlohmann::json& j) {
  try {
    SelectionResult r;
    r.model = j.at("model").get<std::string>();
    auto task = parse_task(j.at("task").get<std::string>());
    if (!task) throw ValidationError("score file has unknown task");
    r.task = *task;
    r.variant = j.at("variant").get<std::string>();
    for (const auto& t : j.at("templates")) {
      r.scores.push_back({t.at("template_id").get<int>(), t.at("score").get<double>(),
                          t.at("if_error_rate").get<double>(), t.at("items").get<std::size_t>(),
                          t.at("complete").get<bool>()});
    }
    if (!j.at("best_template_id").is_null()) r.best_template_id = j.at("best_template_id").get<int>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("score file: ") + e.what());
  }
}

}  // namespace dialex
