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

#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "dialex/corpus.hpp"
#include "fixtures.hpp"

namespace dialex {
namespace {

using Tokens = std::vector<std::string>;

TEST(Tokenize, KeepsIntraWordApostrophes) {
  EXPECT_EQ(tokenize("d'Wiesn is schee!"), (Tokens{"d'Wiesn", "is", "schee"}));
}

TEST(Tokenize, DropsDigits) { EXPECT_EQ(tokenize("1984 woa a Joar"), (Tokens{"woa", "a", "Joar"})); }

TEST(Tokenize, KeepsNonLatinLetters) {
  EXPECT_EQ(tokenize("Αθήνα heißt Athen"), (Tokens{"Αθήνα", "heißt", "Athen"}));
}

TEST(Tokenize, HyphensJoinOnlyBetweenLetters) {
  EXPECT_EQ(tokenize("Sankt-Martin - -vorn hint- x"), (Tokens{"Sankt-Martin", "vorn", "hint", "x"}));
  EXPECT_EQ(tokenize("geht’s"), (Tokens{"geht’s"}));
}

TEST(Tokenize, CombiningMarksStayInsideTheToken) {
  // "e" followed by U+0301 COMBINING ACUTE ACCENT
  EXPECT_EQ(tokenize("cafe\xCC\x81 au lait"), (Tokens{"cafe\xCC\x81", "au", "lait"}));
}

TEST(Tokenize, IsIdempotentOnItsOwnOutput) {
  for (std::string s : {"d'Wiesn is schee!", "Mia san mia, 1999 -- oder ned?", "Ötzi's Grab: „do drom“"}) {
    const auto once = tokenize(s);
    std::string joined;
    for (const auto& t : once) joined += t + " ";
    EXPECT_EQ(tokenize(joined), once) << s;
  }
}

TEST(TokenizeWithOffsets, ReportsCodePointOffsets) {
  const auto toks = tokenize_with_offsets(U"Ä bä, cä");
  ASSERT_EQ(toks.size(), 3u);
  EXPECT_EQ(toks[0].offset, 0u);
  EXPECT_EQ(toks[1].offset, 2u);
  EXPECT_EQ(toks[2].offset, 6u);
}

TEST(IngestDialect, PlainLinesIsOneSentencePerLine) {
  std::istringstream in("I bin do.\nMia san mia.");
  const auto recs = ingest_dialect_corpus(in, DialectFormat::kPlainLines);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].text, "I bin do.");
  EXPECT_EQ(recs[1].text, "Mia san mia.");
  EXPECT_EQ(recs[1].sentence_index, 1u);
}

TEST(IngestDialect, EmptySourceGivesNoRecords) {
  std::istringstream in("");
  EXPECT_TRUE(ingest_dialect_corpus(in, DialectFormat::kPlainLines).empty());
  std::istringstream in2("");
  EXPECT_TRUE(ingest_dialect_corpus(in2, DialectFormat::kWikiExtract).empty());
}

TEST(IngestDialect, PlainLinesSkipsBlankLinesAndTrims) {
  std::ifstream in(testing::data_path("dialect_plain.txt"));
  const auto recs = ingest_dialect_corpus(in, DialectFormat::kPlainLines, "plain");
  ASSERT_EQ(recs.size(), 3u);
  EXPECT_EQ(recs[2].text, "Des Wedda is heid schee.");
  EXPECT_EQ(recs[2].doc_id, "plain");
}

TEST(IngestDialect, WikiExtractSplitsOnTerminalPunctuationBeforeCapitals) {
  std::istringstream in("<doc id=\"7\" title=\"x\">\nA is do. B is a do! kloa? no ned. 1984 war. „Zitat“ folgt.\n</doc>\n");
  const auto recs = ingest_dialect_corpus(in, DialectFormat::kWikiExtract);
  ASSERT_EQ(recs.size(), 3u);
  EXPECT_EQ(recs[0].text, "A is do.");
  EXPECT_EQ(recs[1].text, "B is a do! kloa? no ned. 1984 war.");
  EXPECT_EQ(recs[2].text, "„Zitat“ folgt.");
  for (const auto& r : recs) EXPECT_EQ(r.doc_id, "7");
}

TEST(IngestDialect, BundledWikiFixture) {
  // Hand count: titles are one sentence each; bar-1 has 1+3+2, bar-2 1+3+1,
  // bar-3 1+2+2 (no split before "1984").
  std::ifstream in(testing::data_path("dialect_wiki.txt"));
  const auto recs = ingest_dialect_corpus(in, DialectFormat::kWikiExtract);
  ASSERT_EQ(recs.size(), 16u);
  std::set<SentenceRef> refs;
  for (const auto& r : recs) {
    EXPECT_FALSE(r.text.empty());
    EXPECT_TRUE(refs.insert(r.ref()).second) << r.doc_id << "/" << r.sentence_index;
  }
  EXPECT_EQ(recs[0].doc_id, "bar-1");
  EXPECT_EQ(recs[6].doc_id, "bar-2");
  EXPECT_EQ(recs[6].sentence_index, 0u);
  EXPECT_EQ(recs[5].text, "Dozwischn gibts an Haffa Leit, de wo Bier dringan und Brezn essn.");
}

TEST(IngestDialect, MalformedUtf8ReportsByteOffset) {
  std::istringstream in(std::string("gut\nschlecht \xC3\x28 da\n"));
  try {
    ingest_dialect_corpus(in, DialectFormat::kPlainLines);
    FAIL() << "expected a decode error";
  } catch (const DecodeError& e) {
    EXPECT_EQ(e.byte_offset(), 13u);
  }
}

TEST(IngestTagged, MapsColumns) {
  std::istringstream in("Häuser\tHaus\tNOUN\n");
  const auto toks = ingest_tagged_corpus(in);
  ASSERT_EQ(toks.size(), 1u);
  EXPECT_EQ(toks[0].surface, "Häuser");
  EXPECT_EQ(toks[0].lemma, "Haus");
  EXPECT_EQ(toks[0].upos, Pos::NOUN);
}

TEST(IngestTagged, BlankLineStartsNextSentence) {
  std::istringstream in("a\ta\tDET\nb\tb\tNOUN\n\n\n# comment\nc\tc\tVERB\n");
  const auto toks = ingest_tagged_corpus(in, "d");
  ASSERT_EQ(toks.size(), 3u);
  EXPECT_EQ(toks[1].sentence.sentence_index, 0u);
  EXPECT_EQ(toks[2].sentence.sentence_index, 1u);
  EXPECT_EQ(toks[2].sentence.doc_id, "d");
}

TEST(IngestTagged, WrongColumnCountNamesTheLine) {
  std::istringstream in("a\ta\tDET\n# c\nb\tb\n");
  try {
    ingest_tagged_corpus(in);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(IngestTagged, UnknownTagIsNamed) {
  std::istringstream in("a\ta\tNOUN\nb\tb\tNN\n");
  try {
    ingest_tagged_corpus(in);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("'NN'"), std::string::npos);
  }
}

TEST(IngestTagged, BundledFixtureTokenCount) {
  // 172 = non-blank, non-comment lines of the fixture (counted with a script).
  std::ifstream in(testing::data_path("standard_tagged.tsv"));
  const auto toks = ingest_tagged_corpus(in);
  EXPECT_EQ(toks.size(), 172u);
  bool saw = false;
  for (const auto& t : toks) saw |= t.lemma == "zweisprachig" && t.upos == Pos::ADJ;
  EXPECT_TRUE(saw);
  EXPECT_EQ(toks.front().sentence.doc_id, "de-1");
  EXPECT_EQ(toks.back().sentence.doc_id, "de-2");
}

TEST(IngestTagged, RoundTripThroughColumnFormat) {
  std::ifstream in(testing::data_path("standard_tagged.tsv"));
  const auto toks = ingest_tagged_corpus(in);
  std::ostringstream out;
  write_tagged_corpus(out, toks);
  std::istringstream again(out.str());
  EXPECT_EQ(ingest_tagged_corpus(again), toks);
}

}  // namespace
}  // namespace dialex
