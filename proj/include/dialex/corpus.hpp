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

#include <compare>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dialex/error.hpp"
#include "dialex/pos.hpp"
#include "dialex/unicode.hpp"

namespace dialex {

struct SentenceRef {
  std::string doc_id;
  std::size_t sentence_index = 0;

  auto operator<=>(const SentenceRef&) const = default;
};

struct SentenceRecord {
  std::string doc_id;
  std::size_t sentence_index = 0;
  std::string text;

  SentenceRef ref() const { return {doc_id, sentence_index}; }
  bool operator==(const SentenceRecord&) const = default;
};

struct TaggedToken {
  std::string surface;
  std::string lemma;
  Pos upos = Pos::X;
  SentenceRef sentence;

  bool operator==(const TaggedToken&) const = default;
};

enum class DialectFormat { kPlainLines, kWikiExtract };

inline std::optional<DialectFormat> parse_dialect_format(std::string_view s) {
  if (s == "plain-lines") return DialectFormat::kPlainLines;
  if (s == "wiki-extract") return DialectFormat::kWikiExtract;
  return std::nullopt;
}

// A token together with its position in the sentence, in code points.
struct Token {
  std::u32string text;
  std::size_t offset = 0;
};

namespace detail {

inline bool is_joiner(char32_t c) {
  return c == U'-' || c == U'‐' || c == U'‑' || c == U'\'' || c == U'’' ||
         c == U'ʼ';
}

inline std::u32string_view trim(std::u32string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && unicode::is_space(s[b])) ++b;
  while (e > b && unicode::is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

inline void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

// Sentence ends at . ! ? followed by whitespace and then an uppercase letter
// or opening punctuation.
inline std::vector<std::u32string> split_sentences(std::u32string_view para) {
  std::vector<std::u32string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < para.size(); ++i) {
    const char32_t c = para[i];
    if (c != U'.' && c != U'!' && c != U'?') continue;
    std::size_t j = i + 1;
    if (j >= para.size() || !unicode::is_space(para[j])) continue;
    while (j < para.size() && unicode::is_space(para[j])) ++j;
    if (j < para.size() && (unicode::is_upper(para[j]) || unicode::is_opening_punct(para[j]))) {
      auto piece = trim(para.substr(start, i + 1 - start));
      if (!piece.empty()) out.emplace_back(piece);
      start = j;
      i = j - 1;
    }
  }
  auto tail = trim(para.substr(start));
  if (!tail.empty()) out.emplace_back(tail);
  return out;
}

inline std::optional<std::string> wiki_doc_id(std::string_view line) {
  if (!line.starts_with("<doc")) return std::nullopt;
  const auto pos = line.find("id=\"");
  if (pos == std::string_view::npos) return std::string("doc");
  const auto end = line.find('"', pos + 4);
  if (end == std::string_view::npos) return std::string("doc");
  return std::string(line.substr(pos + 4, end - pos - 4));
}

}  // namespace detail

// Maximal runs of letters (any script, with their combining marks); a hyphen
// or apostrophe is kept when it sits between two letters. Digits and other
// punctuation separate tokens and are dropped.
inline std::vector<Token> tokenize_with_offsets(std::u32string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!unicode::is_letter(s[i])) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < s.size()) {
      if (unicode::is_letter(s[i])) {
        ++i;
      } else if (detail::is_joiner(s[i]) && i + 1 < s.size() && unicode::is_letter(s[i + 1])) {
        i += 2;
      } else {
        break;
      }
    }
    out.push_back({std::u32string(s.substr(start, i - start)), start});
  }
  return out;
}

inline std::vector<std::string> tokenize(std::string_view sentence) {
  std::vector<std::string> out;
  for (auto& t : tokenize_with_offsets(unicode::decode(sentence))) {
    out.push_back(unicode::encode(t.text));
  }
  return out;
}

// Streams SentenceRecords to `sink` in corpus order. In plain-lines mode each
// non-blank line is one sentence of `doc_id`. In wiki-extract mode
// `<doc id="...">` lines open a document and paragraphs are split into
// sentences.
template <class Sink>
void for_each_dialect_sentence(std::istream& in, DialectFormat format, std::string_view doc_id,
                               Sink&& sink) {
  std::string line;
  std::size_t byte_offset = 0;
  std::string current_doc(doc_id);
  std::size_t index = 0;
  while (std::getline(in, line)) {
    const std::size_t line_start = byte_offset;
    byte_offset += line.size() + 1;
    detail::strip_cr(line);
    auto cps = unicode::decode(line, line_start);
    if (format == DialectFormat::kPlainLines) {
      auto text = detail::trim(cps);
      if (text.empty()) continue;
      sink(SentenceRecord{current_doc, index++, unicode::encode(text)});
      continue;
    }
    if (auto id = detail::wiki_doc_id(line)) {
      current_doc = *id;
      index = 0;
      continue;
    }
    if (line.starts_with("</doc>")) {
      current_doc = std::string(doc_id);
      continue;
    }
    for (auto& sentence : detail::split_sentences(cps)) {
      sink(SentenceRecord{current_doc, index++, unicode::encode(sentence)});
    }
  }
}

inline std::vector<SentenceRecord> ingest_dialect_corpus(std::istream& in, DialectFormat format,
                                                         std::string_view doc_id = "doc") {
  std::vector<SentenceRecord> out;
  for_each_dialect_sentence(in, format, doc_id,
                            [&](SentenceRecord&& r) { out.push_back(std::move(r)); });
  return out;
}

// Three tab-separated columns (surface, lemma, upos); '#' starts a comment,
// "# newdoc id = X" switches document; blank lines separate sentences.
template <class Sink>
void for_each_tagged_token(std::istream& in, std::string_view doc_id, Sink&& sink) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t byte_offset = 0;
  std::string current_doc(doc_id);
  std::size_t sentence = 0;
  bool in_sentence = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t line_start = byte_offset;
    byte_offset += line.size() + 1;
    detail::strip_cr(line);
    unicode::validate(line, line_start);
    if (line.empty()) {
      if (in_sentence) {
        ++sentence;
        in_sentence = false;
      }
      continue;
    }
    if (line.front() == '#') {
      constexpr std::string_view kNewDoc = "# newdoc id = ";
      if (line.starts_with(kNewDoc)) {
        in_sentence = false;
        current_doc = line.substr(kNewDoc.size());
        sentence = 0;
      }
      continue;
    }
    std::vector<std::string_view> cols;
    std::string_view rest(line);
    for (;;) {
      const auto tab = rest.find('\t');
      cols.push_back(rest.substr(0, tab));
      if (tab == std::string_view::npos) break;
      rest.remove_prefix(tab + 1);
    }
    if (cols.size() != 3) {
      throw ParseError(line_no, "expected 3 tab-separated columns, got " +
                                    std::to_string(cols.size()));
    }
    if (cols[0].empty() || cols[1].empty()) throw ParseError(line_no, "empty surface or lemma");
    auto pos = parse_pos(cols[2]);
    if (!pos) throw ParseError(line_no, "unknown POS tag '" + std::string(cols[2]) + "'");
    in_sentence = true;
    sink(TaggedToken{std::string(cols[0]), std::string(cols[1]), *pos,
                     SentenceRef{current_doc, sentence}});
  }
}

inline std::vector<TaggedToken> ingest_tagged_corpus(std::istream& in,
                                                     std::string_view doc_id = "doc") {
  std::vector<TaggedToken> out;
  for_each_tagged_token(in, doc_id, [&](TaggedToken&& t) { out.push_back(std::move(t)); });
  return out;
}

// Inverse of ingest_tagged_corpus for streams it produced.
inline void write_tagged_corpus(std::ostream& out, std::span<const TaggedToken> tokens,
                                std::string_view doc_id = "doc") {
  const SentenceRef* prev = nullptr;
  std::string_view doc = doc_id;
  for (const auto& t : tokens) {
    if (t.sentence.doc_id != doc) {
      if (prev) out << '\n';
      out << "# newdoc id = " << t.sentence.doc_id << '\n';
      doc = t.sentence.doc_id;
    } else if (prev && prev->sentence_index != t.sentence.sentence_index) {
      out << '\n';
    }
    out << t.surface << '\t' << t.lemma << '\t' << to_string(t.upos) << '\n';
    prev = &t.sentence;
  }
}

}  // namespace dialex
