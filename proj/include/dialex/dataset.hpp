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
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dialex/error.hpp"
#include "dialex/label.hpp"
#include "dialex/matcher.hpp"
#include "dialex/pos.hpp"
#include "dialex/random.hpp"

namespace dialex {

enum class Split { kUnassigned, kDev, kTest };

constexpr std::string_view to_string(Split s) {
  switch (s) {
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
    case Split::kUnassigned: return "unassigned";
  }
  return "?";
}

inline std::optional<Split> parse_split(std::string_view s) {
  if (s == "dev") return Split::kDev;
  if (s == "test") return Split::kTest;
  if (s == "unassigned" || s.empty()) return Split::kUnassigned;
  return std::nullopt;
}

struct DatasetItem {
  std::string pair_id;
  std::string lemma;
  Pos pos_max = Pos::X;
  std::string term;
  std::size_t distance = 0;
  std::vector<std::string> contexts;  // snippets, at most three are persisted
  std::optional<Label> gold;
  bool unresolved = false;             // annotated, but no strict majority
  Split split = Split::kUnassigned;
  std::uint64_t lemma_freq = 0;        // not persisted in the TSV

  bool operator==(const DatasetItem&) const = default;
};

inline std::string make_pair_id(std::size_t ordinal) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "p%06zu", ordinal + 1);
  return buf;
}

// Pair ids follow candidate-table order, so they are stable for a given table.
inline std::vector<DatasetItem> items_from_candidates(std::span<const CandidatePair> pairs) {
  std::vector<DatasetItem> items;
  items.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    DatasetItem item;
    item.pair_id = make_pair_id(i);
    item.lemma = p.lemma;
    item.pos_max = p.pos_max;
    item.term = p.term;
    item.distance = p.distance;
    item.lemma_freq = p.lemma_freq;
    for (const auto& c : p.contexts) item.contexts.push_back(c.snippet);
    items.push_back(std::move(item));
  }
  return items;
}

inline constexpr std::string_view kDatasetHeader =
    "pair_id\tlemma\tpos_max\tterm\tdistance\tgold\tsplit\tcontext_1\tcontext_2\tcontext_3";

namespace detail {

inline std::string escape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string unescape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out += s[i];
      continue;
    }
    switch (s[++i]) {
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      default: out += s[i];
    }
  }
  return out;
}

inline std::string gold_field(const DatasetItem& item) {
  if (item.gold) return std::string(to_string(*item.gold));
  return item.unresolved ? "unresolved" : "";
}

inline void parse_gold(DatasetItem& item, std::string_view s, std::size_t line_no) {
  item.gold.reset();
  item.unresolved = false;
  if (s.empty()) return;
  if (s == "unresolved") {
    item.unresolved = true;
    return;
  }
  item.gold = parse_label(s);
  if (!item.gold) throw ParseError(line_no, "invalid gold label '" + std::string(s) + "'");
}

inline DatasetItem item_from_json(const nlohmann::json& j, std::size_t line_no) {
  try {
    DatasetItem item;
    item.pair_id = j.at("pair_id").get<std::string>();
    item.lemma = j.at("lemma").get<std::string>();
    auto pos = parse_pos(j.at("pos_max").get<std::string>());
    if (!pos) throw ParseError(line_no, "unknown POS tag");
    item.pos_max = *pos;
    item.term = j.at("term").get<std::string>();
    item.distance = j.at("distance").get<std::size_t>();
    const auto& g = j.at("gold");
    parse_gold(item, g.is_null() ? std::string() : g.get<std::string>(), line_no);
    auto split = parse_split(j.value("split", std::string()));
    if (!split) throw ParseError(line_no, "invalid split");
    item.split = *split;
    if (j.contains("contexts")) {
      for (const auto& c : j.at("contexts")) item.contexts.push_back(c.get<std::string>());
    }
    return item;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(line_no, std::string("dataset record: ") + e.what());
  }
}

}  // namespace detail

inline void write_dataset_tsv(std::ostream& out, std::span<const DatasetItem> items) {
  out << kDatasetHeader << '\n';
  for (const auto& it : items) {
    out << detail::escape_field(it.pair_id) << '\t' << detail::escape_field(it.lemma) << '\t'
        << to_string(it.pos_max) << '\t' << detail::escape_field(it.term) << '\t' << it.distance
        << '\t' << detail::gold_field(it) << '\t' << to_string(it.split);
    for (std::size_t c = 0; c < 3; ++c) {
      out << '\t';
      if (c < it.contexts.size()) out << detail::escape_field(it.contexts[c]);
    }
    out << '\n';
  }
}

inline std::vector<DatasetItem> read_dataset_tsv(std::istream& in) {
  std::vector<DatasetItem> items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    if (line_no == 1) {
      if (line != kDatasetHeader) throw ParseError(1, "dataset header does not match schema");
      continue;
    }
    if (line.empty()) continue;
    auto cols = detail::split_tabs(line);
    if (cols.size() != 10) {
      throw ParseError(line_no, "expected 10 columns, got " + std::to_string(cols.size()));
    }
    DatasetItem item;
    item.pair_id = detail::unescape_field(cols[0]);
    item.lemma = detail::unescape_field(cols[1]);
    auto pos = parse_pos(cols[2]);
    if (!pos) throw ParseError(line_no, "unknown POS tag '" + cols[2] + "'");
    item.pos_max = *pos;
    item.term = detail::unescape_field(cols[3]);
    item.distance = detail::parse_count(cols[4], line_no);
    detail::parse_gold(item, cols[5], line_no);
    auto split = parse_split(cols[6]);
    if (!split) throw ParseError(line_no, "invalid split '" + cols[6] + "'");
    item.split = *split;
    for (std::size_t c = 7; c < 10; ++c) {
      if (!cols[c].empty()) item.contexts.push_back(detail::unescape_field(cols[c]));
    }
    if (item.pair_id.empty() || item.lemma.empty() || item.term.empty()) {
      throw ParseError(line_no, "empty pair_id, lemma or term");
    }
    items.push_back(std::move(item));
  }
  return items;
}

// Same fields as the TSV, one JSON object per line; contexts is an array.
inline std::vector<DatasetItem> read_dataset_jsonl(std::istream& in) {
  std::vector<DatasetItem> items;
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
    items.push_back(detail::item_from_json(j, line_no));
  }
  return items;
}

// Loads a released dataset file in either format; the first byte decides.
inline std::vector<DatasetItem> load_released_dataset(std::istream& in) {
  const int first = in.peek();
  if (first == '{') return read_dataset_jsonl(in);
  return read_dataset_tsv(in);
}

// Strict majority of the submitted labels, or nullopt (unresolved).
inline std::optional<Label> adjudicate(std::span<const Label> labels) {
  std::array<std::size_t, kLabelCount> counts{};
  for (Label l : labels) ++counts[index(l)];
  for (Label l : kAllLabels) {
    if (2 * counts[index(l)] > labels.size()) return l;
  }
  return std::nullopt;
}

// Fleiss' kappa over per-item category counts; every row must sum to the same
// number of raters r >= 2. Returns nullopt when chance agreement is 1 (all
// ratings in one category), where kappa is undefined.
inline std::optional<double> fleiss_kappa_counts(std::span<const std::vector<std::size_t>> counts) {
  if (counts.empty()) throw ValidationError("fleiss_kappa needs at least one item");
  const std::size_t categories = counts.front().size();
  std::size_t raters = 0;
  for (auto c : counts.front()) raters += c;
  if (raters < 2) throw ValidationError("fleiss_kappa needs at least two ratings per item");
  std::vector<double> category_total(categories, 0.0);
  double p_bar = 0.0;
  for (const auto& row : counts) {
    if (row.size() != categories) throw ValidationError("ragged category count matrix");
    std::size_t sum = 0;
    double agree = 0.0;
    for (std::size_t j = 0; j < categories; ++j) {
      sum += row[j];
      agree += static_cast<double>(row[j]) * static_cast<double>(row[j]);
      category_total[j] += static_cast<double>(row[j]);
    }
    if (sum != raters) throw ValidationError("items have different numbers of ratings");
    const double r = static_cast<double>(raters);
    p_bar += (agree - r) / (r * (r - 1.0));
  }
  const double n = static_cast<double>(counts.size());
  p_bar /= n;
  double p_e = 0.0;
  for (double t : category_total) {
    const double p = t / (n * static_cast<double>(raters));
    p_e += p * p;
  }
  if (p_e >= 1.0) return std::nullopt;
  return (p_bar - p_e) / (1.0 - p_e);
}

// Items x annotators label matrix.
inline std::optional<double> fleiss_kappa(std::span<const std::vector<Label>> ratings) {
  std::vector<std::vector<std::size_t>> counts;
  counts.reserve(ratings.size());
  for (const auto& item : ratings) {
    std::vector<std::size_t> row(kLabelCount, 0);
    for (Label l : item) ++row[index(l)];
    counts.push_back(std::move(row));
  }
  return fleiss_kappa_counts(counts);
}

// Marks exactly `dev_size` items as dev, drawn uniformly under `seed`; the
// rest become test.
inline std::vector<DatasetItem> split_dev_test(std::vector<DatasetItem> items, std::size_t dev_size,
                                               std::uint64_t seed) {
  if (dev_size == 0) throw ConfigError("dev size must be positive");
  if (items.size() <= dev_size) {
    throw ConfigError("dev size " + std::to_string(dev_size) + " needs more than " +
                      std::to_string(items.size()) + " items");
  }
  std::vector<std::size_t> order(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto rng = derived_rng(seed, "dev-test-split");
  for (std::size_t i = 0; i < dev_size; ++i) {
    const auto j = i + uniform_index(rng, order.size() - i);
    std::swap(order[i], order[j]);
  }
  for (auto& it : items) it.split = Split::kTest;
  for (std::size_t i = 0; i < dev_size; ++i) items[order[i]].split = Split::kDev;
  return items;
}

struct DictionaryEntry {
  std::vector<std::string> translations;
  std::vector<std::string> inflected_forms;

  bool operator==(const DictionaryEntry&) const = default;
};

using VariationDictionary = std::map<std::string, DictionaryEntry>;

// 'yes' items become translations, 'inflected' items inflected forms; all
// other items are left out.
inline VariationDictionary compile_dictionary(std::span<const DatasetItem> items) {
  VariationDictionary dict;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& it : items) {
    if (!it.gold || *it.gold == Label::kNo) continue;
    if (!seen.emplace(it.lemma, it.term).second) continue;
    auto& entry = dict[it.lemma];
    (*it.gold == Label::kYes ? entry.translations : entry.inflected_forms).push_back(it.term);
  }
  return dict;
}

inline nlohmann::ordered_json to_json(const VariationDictionary& dict) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [lemma, e] : dict) {
    j[lemma] = {{"translations", e.translations}, {"inflected_forms", e.inflected_forms}};
  }
  return j;
}

// Gold 'yes' items: the reference set for dialect-to-standard translation.
inline std::vector<DatasetItem> translation_slice(std::span<const DatasetItem> items) {
  std::vector<DatasetItem> out;
  for (const auto& it : items) {
    if (it.gold == Label::kYes) out.push_back(it);
  }
  return out;
}

inline std::vector<DatasetItem> select_split(std::span<const DatasetItem> items, Split split) {
  std::vector<DatasetItem> out;
  for (const auto& it : items) {
    if (it.split == split) out.push_back(it);
  }
  return out;
}

}  // namespace dialex
