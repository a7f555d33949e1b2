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
#include <array>
#include <cstdint>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dialex/corpus.hpp"
#include "dialex/error.hpp"
#include "dialex/pos.hpp"
#include "dialex/unicode.hpp"

namespace dialex {

struct LemmaEntry {
  std::string lemma;
  Pos pos_max = Pos::X;
  std::uint64_t freq = 0;
  std::map<Pos, std::uint64_t> pos_counts;

  bool operator==(const LemmaEntry&) const = default;
};

struct DialectTermEntry {
  std::string surface;
  std::uint64_t freq = 0;

  bool operator==(const DialectTermEntry&) const = default;
};

struct PipelineConfig {
  std::size_t n = 10000;     // standard vocabulary cap
  std::size_t k = 10;        // neighbors per lemma
  std::size_t c = 3;         // contexts per term
  std::size_t window = 50;   // context characters on each side
  std::uint64_t seed = 0;

  void validate() const {
    if (n == 0) throw ConfigError("n must be positive");
    if (k == 0) throw ConfigError("k must be positive");
    if (window == 0) throw ConfigError("window must be positive");
  }
};

// Lemma/POS counts. Shards can be counted independently and merged; the
// result does not depend on merge order.
class LemmaCounter {
 public:
  void add(const TaggedToken& t) { ++counts_[t.lemma][static_cast<std::size_t>(t.upos)]; }

  void merge(const LemmaCounter& other) {
    for (const auto& [lemma, counts] : other.counts_) {
      auto& mine = counts_[lemma];
      for (std::size_t i = 0; i < kPosCount; ++i) mine[i] += counts[i];
    }
  }

  // Sorted by frequency descending, then lemma; truncated to n.
  std::vector<LemmaEntry> top(std::size_t n) const {
    std::vector<LemmaEntry> out;
    out.reserve(counts_.size());
    for (const auto& [lemma, counts] : counts_) {
      LemmaEntry e{lemma, Pos::X, 0, {}};
      bool have_max = false;
      for (std::size_t i = 0; i < kPosCount; ++i) {
        if (counts[i] == 0) continue;
        const auto pos = static_cast<Pos>(i);
        e.pos_counts[pos] = counts[i];
        e.freq += counts[i];
        const auto best = have_max ? e.pos_counts[e.pos_max] : 0;
        if (!have_max || counts[i] > best ||
            (counts[i] == best && pos_priority(pos) < pos_priority(e.pos_max))) {
          e.pos_max = pos;
          have_max = true;
        }
      }
      out.push_back(std::move(e));
    }
    std::sort(out.begin(), out.end(), [](const LemmaEntry& a, const LemmaEntry& b) {
      if (a.freq != b.freq) return a.freq > b.freq;
      return a.lemma < b.lemma;
    });
    if (out.size() > n) out.resize(n);
    return out;
  }

 private:
  std::unordered_map<std::string, std::array<std::uint64_t, kPosCount>> counts_;
};

inline std::vector<LemmaEntry> build_standard_vocab(std::span<const TaggedToken> tokens,
                                                    std::size_t n) {
  LemmaCounter counter;
  for (const auto& t : tokens) counter.add(t);
  return counter.top(n);
}

class TermCounter {
 public:
  void add_sentence(std::string_view text) {
    for (auto& tok : tokenize_with_offsets(unicode::decode(text))) {
      ++counts_[unicode::encode(tok.text)];
    }
  }

  void merge(const TermCounter& other) {
    for (const auto& [term, n] : other.counts_) counts_[term] += n;
  }

  // Frequency descending, then surface.
  std::vector<DialectTermEntry> entries() const {
    std::vector<DialectTermEntry> out;
    out.reserve(counts_.size());
    for (const auto& [term, n] : counts_) out.push_back({term, n});
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
      if (a.freq != b.freq) return a.freq > b.freq;
      return a.surface < b.surface;
    });
    return out;
  }

 private:
  std::unordered_map<std::string, std::uint64_t> counts_;
};

inline std::vector<DialectTermEntry> build_dialect_vocab(std::span<const SentenceRecord> sentences) {
  TermCounter counter;
  for (const auto& s : sentences) counter.add_sentence(s.text);
  return counter.entries();
}

// Drops dialect terms that are spelled exactly like a standard lemma.
// With `fold_case` both sides are Unicode case-folded before comparing.
inline std::vector<DialectTermEntry> filter_shared(std::span<const DialectTermEntry> dialect,
                                                   const std::set<std::string>& standard_lemmas,
                                                   bool fold_case = false) {
  std::unordered_set<std::string> folded;
  if (fold_case) {
    for (const auto& l : standard_lemmas) folded.insert(unicode::fold_case(l));
  }
  std::vector<DialectTermEntry> out;
  for (const auto& e : dialect) {
    const bool shared = fold_case ? folded.contains(unicode::fold_case(e.surface))
                                  : standard_lemmas.contains(e.surface);
    if (!shared) out.push_back(e);
  }
  return out;
}

inline std::set<std::string> lemma_set(std::span<const LemmaEntry> vocab) {
  std::set<std::string> out;
  for (const auto& e : vocab) out.insert(e.lemma);
  return out;
}

// TSV export: lemma, pos_max, freq.
inline void write_standard_vocab(std::ostream& out, std::span<const LemmaEntry> vocab) {
  out << "lemma\tpos_max\tfreq\n";
  for (const auto& e : vocab) out << e.lemma << '\t' << to_string(e.pos_max) << '\t' << e.freq << '\n';
}

// TSV export: surface, freq.
inline void write_dialect_vocab(std::ostream& out, std::span<const DialectTermEntry> vocab) {
  out << "surface\tfreq\n";
  for (const auto& e : vocab) out << e.surface << '\t' << e.freq << '\n';
}

namespace detail {

inline std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> cols;
  for (;;) {
    const auto tab = line.find('\t');
    cols.emplace_back(line.substr(0, tab));
    if (tab == std::string_view::npos) break;
    line.remove_prefix(tab + 1);
  }
  return cols;
}

inline std::uint64_t parse_count(const std::string& s, std::size_t line_no) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw ParseError(line_no, "expected a non-negative integer, got '" + s + "'");
  }
  return std::stoull(s);
}

}  // namespace detail

// Reads the TSV written by write_standard_vocab. pos_counts holds only pos_max.
inline std::vector<LemmaEntry> read_standard_vocab(std::istream& in) {
  std::vector<LemmaEntry> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    if (line_no == 1) {
      if (line != "lemma\tpos_max\tfreq") throw ParseError(1, "bad standard vocabulary header");
      continue;
    }
    if (line.empty()) continue;
    auto cols = detail::split_tabs(line);
    if (cols.size() != 3) throw ParseError(line_no, "expected 3 columns");
    auto pos = parse_pos(cols[1]);
    if (!pos) throw ParseError(line_no, "unknown POS tag '" + cols[1] + "'");
    const auto freq = detail::parse_count(cols[2], line_no);
    out.push_back({cols[0], *pos, freq, {{*pos, freq}}});
  }
  return out;
}

inline std::vector<DialectTermEntry> read_dialect_vocab(std::istream& in) {
  std::vector<DialectTermEntry> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    if (line_no == 1) {
      if (line != "surface\tfreq") throw ParseError(1, "bad dialect vocabulary header");
      continue;
    }
    if (line.empty()) continue;
    auto cols = detail::split_tabs(line);
    if (cols.size() != 2) throw ParseError(line_no, "expected 2 columns");
    out.push_back({cols[0], detail::parse_count(cols[1], line_no)});
  }
  return out;
}

}  // namespace dialex
