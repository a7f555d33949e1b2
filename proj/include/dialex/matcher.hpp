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
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "dialex/corpus.hpp"
#include "dialex/error.hpp"
#include "dialex/neighbor_index.hpp"
#include "dialex/pos.hpp"
#include "dialex/random.hpp"
#include "dialex/unicode.hpp"
#include "dialex/vocab.hpp"

namespace dialex {

struct UsageContext {
  std::string term;
  std::string snippet;
  SentenceRef source;

  bool operator==(const UsageContext&) const = default;
};

struct CandidatePair {
  std::string lemma;
  Pos pos_max = Pos::X;
  std::uint64_t lemma_freq = 0;
  std::string term;
  std::uint64_t term_freq = 0;
  std::size_t distance = 0;
  std::size_t rank = 0;  // 1-based
  std::vector<UsageContext> contexts;

  bool operator==(const CandidatePair&) const = default;
};

struct CandidateRow {
  LemmaEntry lemma;
  std::vector<CandidatePair> pairs;
  bool truncated = false;
};

// Whole-token occurrences of every dialect token, in corpus order.
class CorpusIndex {
 public:
  struct Occurrence {
    std::uint32_t sentence;
    std::uint32_t offset;  // code points
  };

  // Keeps at most `max_per_term` occurrences of each token.
  explicit CorpusIndex(std::span<const SentenceRecord> sentences,
                       std::size_t max_per_term = static_cast<std::size_t>(-1)) {
    sentences_.reserve(sentences.size());
    for (std::size_t s = 0; s < sentences.size(); ++s) {
      sentences_.push_back({sentences[s].ref(), unicode::decode(sentences[s].text)});
      for (const auto& tok : tokenize_with_offsets(sentences_.back().text)) {
        auto& occ = occurrences_[unicode::encode(tok.text)];
        if (occ.size() < max_per_term) {
          occ.push_back({static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(tok.offset)});
        }
      }
    }
  }

  std::span<const Occurrence> occurrences(const std::string& term) const {
    auto it = occurrences_.find(term);
    if (it == occurrences_.end()) return {};
    return it->second;
  }

  const SentenceRef& ref(std::uint32_t sentence) const { return sentences_[sentence].ref; }
  const std::u32string& text(std::uint32_t sentence) const { return sentences_[sentence].text; }

 private:
  struct Sentence {
    SentenceRef ref;
    std::u32string text;
  };
  std::vector<Sentence> sentences_;
  std::unordered_map<std::string, std::vector<Occurrence>> occurrences_;
};

// First `c` whole-token occurrences of `term`, each clipped to `window` code
// points on either side and to its sentence.
inline std::vector<UsageContext> extract_contexts(const std::string& term, const CorpusIndex& corpus,
                                                  std::size_t c, std::size_t window) {
  std::vector<UsageContext> out;
  const std::size_t len = unicode::length(term);
  for (const auto& occ : corpus.occurrences(term)) {
    if (out.size() >= c) break;
    const auto& text = corpus.text(occ.sentence);
    const std::size_t begin = occ.offset > window ? occ.offset - window : 0;
    const std::size_t end = std::min(text.size(), occ.offset + len + window);
    out.push_back({term, unicode::encode(std::u32string_view(text).substr(begin, end - begin)),
                   corpus.ref(occ.sentence)});
  }
  return out;
}

enum class IndexKind { kLengthBanded, kBkTree };

namespace detail {

template <NeighborIndex Index>
std::vector<CandidateRow> build_rows(std::span<const LemmaEntry> standard, const Index& index,
                                     const CorpusIndex& corpus, const PipelineConfig& config,
                                     unsigned threads) {
  std::vector<CandidateRow> rows(standard.size());
  std::vector<std::vector<TermId>> row_terms(standard.size());

  auto work = [&](std::size_t i) {
    const LemmaEntry& lemma = standard[i];
    auto rng = derived_rng(config.seed, lemma.lemma);
    auto result = knn(std::u32string_view(unicode::decode(lemma.lemma)), index, config.k, rng);
    CandidateRow& row = rows[i];
    row.lemma = lemma;
    row.truncated = result.truncated;
    std::size_t rank = 0;
    for (const auto& n : result.neighbors) {
      if (n.distance == 0) {
        throw PipelineError("lemma '" + lemma.lemma +
                            "' also occurs in the dialect vocabulary; filter shared tokens first");
      }
      row.pairs.push_back({lemma.lemma, lemma.pos_max, lemma.freq, index.terms().utf8(n.term),
                           index.terms().freq(n.term), n.distance, ++rank, {}});
      row_terms[i].push_back(n.term);
    }
  };

  // Contexts depend only on the term, so each is cut once.
  auto attach_contexts = [&] {
    if (config.c == 0) return;
    std::unordered_map<TermId, std::vector<UsageContext>> cache;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t r = 0; r < rows[i].pairs.size(); ++r) {
        const TermId id = row_terms[i][r];
        auto it = cache.find(id);
        if (it == cache.end()) {
          it = cache.emplace(id, extract_contexts(index.terms().utf8(id), corpus, config.c,
                                                  config.window)).first;
        }
        rows[i].pairs[r].contexts = it->second;
      }
    }
  };

  if (threads <= 1 || standard.size() < 2) {
    for (std::size_t i = 0; i < standard.size(); ++i) work(i);
    attach_contexts();
    return rows;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < standard.size(); i += threads) work(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  attach_contexts();
  return rows;
}

}  // namespace detail

// One row per standard lemma, in input order, each with up to k candidates.
// Output is a pure function of the inputs and config.seed; `threads` only
// changes how the work is scheduled.
inline std::vector<CandidateRow> build_candidate_table(std::span<const LemmaEntry> standard,
                                                       std::span<const DialectTermEntry> dialect,
                                                       const CorpusIndex& corpus,
                                                       const PipelineConfig& config,
                                                       IndexKind kind = IndexKind::kLengthBanded,
                                                       unsigned threads = 1) {
  config.validate();
  if (kind == IndexKind::kBkTree) {
    BkTree index(dialect);
    return detail::build_rows(standard, index, corpus, config, threads);
  }
  LengthBandedIndex index(dialect);
  return detail::build_rows(standard, index, corpus, config, threads);
}

inline nlohmann::ordered_json to_json(const CandidatePair& p) {
  nlohmann::ordered_json contexts = nlohmann::ordered_json::array();
  for (const auto& c : p.contexts) {
    contexts.push_back({{"snippet", c.snippet},
                        {"doc_id", c.source.doc_id},
                        {"sentence_index", c.source.sentence_index}});
  }
  return {{"lemma", p.lemma},       {"pos_max", to_string(p.pos_max)},
          {"lemma_freq", p.lemma_freq}, {"term", p.term},
          {"term_freq", p.term_freq}, {"distance", p.distance},
          {"rank", p.rank},         {"contexts", std::move(contexts)}};
}

// JSONL, one object per pair, rows in table order.
inline void write_candidates_jsonl(std::ostream& out, std::span<const CandidateRow> rows) {
  for (const auto& row : rows) {
    for (const auto& p : row.pairs) out << to_json(p).dump() << '\n';
  }
}

inline CandidatePair candidate_from_json(const nlohmann::json& j, std::size_t line_no) {
  try {
    CandidatePair p;
    p.lemma = j.at("lemma").get<std::string>();
    auto pos = parse_pos(j.at("pos_max").get<std::string>());
    if (!pos) throw ParseError(line_no, "unknown POS tag");
    p.pos_max = *pos;
    p.lemma_freq = j.at("lemma_freq").get<std::uint64_t>();
    p.term = j.at("term").get<std::string>();
    p.term_freq = j.at("term_freq").get<std::uint64_t>();
    p.distance = j.at("distance").get<std::size_t>();
    p.rank = j.at("rank").get<std::size_t>();
    for (const auto& c : j.at("contexts")) {
      p.contexts.push_back({p.term, c.at("snippet").get<std::string>(),
                            {c.at("doc_id").get<std::string>(),
                             c.at("sentence_index").get<std::size_t>()}});
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(line_no, std::string("candidate record: ") + e.what());
  }
}

inline std::vector<CandidatePair> read_candidates_jsonl(std::istream& in) {
  std::vector<CandidatePair> out;
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
    out.push_back(candidate_from_json(j, line_no));
  }
  return out;
}

}  // namespace dialex
