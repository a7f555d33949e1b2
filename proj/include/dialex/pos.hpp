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

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace dialex {

// Universal POS tag set (17 tags).
enum class Pos : unsigned char {
  ADJ, ADP, ADV, AUX, CCONJ, DET, INTJ, NOUN, NUM, PART, PRON, PROPN, PUNCT, SCONJ, SYM, VERB, X
};

inline constexpr std::size_t kPosCount = 17;

inline constexpr std::array<std::string_view, kPosCount> kPosNames = {
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X"};

constexpr std::string_view to_string(Pos p) { return kPosNames[static_cast<std::size_t>(p)]; }

constexpr std::optional<Pos> parse_pos(std::string_view s) {
  for (std::size_t i = 0; i < kPosCount; ++i) {
    if (kPosNames[i] == s) return static_cast<Pos>(i);
  }
  return std::nullopt;
}

// Tie-break order for the most frequent tag of a lemma: NOUN, PROPN, VERB,
// ADJ, ADV, then the rest alphabetically. Lower rank wins.
constexpr int pos_priority(Pos p) {
  switch (p) {
    case Pos::NOUN: return 0;
    case Pos::PROPN: return 1;
    case Pos::VERB: return 2;
    case Pos::ADJ: return 3;
    case Pos::ADV: return 4;
    default: return 5 + static_cast<int>(p);  // enum order is alphabetical
  }
}

// Row labels used by the per-POS report tables.
constexpr std::string_view display_name(Pos p) {
  switch (p) {
    case Pos::NOUN: return "Noun";
    case Pos::ADJ: return "Adjective";
    case Pos::ADV: return "Adverb";
    case Pos::VERB: return "Verb";
    case Pos::PROPN: return "Proper Noun";
    case Pos::ADP: return "Adposition";
    case Pos::NUM: return "Numeral";
    case Pos::SCONJ: return "Sub. Conjunction";
    case Pos::DET: return "Determiner";
    case Pos::AUX: return "Auxiliary";
    case Pos::PRON: return "Pronoun";
    case Pos::CCONJ: return "Coord. Conjunction";
    case Pos::X: return "Other (X)";
    case Pos::INTJ: return "Interjection";
    case Pos::PART: return "Particle";
    case Pos::PUNCT: return "Punctuation";
    case Pos::SYM: return "Symbol";
  }
  return "?";
}

}  // namespace dialex
