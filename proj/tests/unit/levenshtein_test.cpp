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

#include <random>

#include <gtest/gtest.h>

#include "dialex/levenshtein.hpp"
#include "oracle.hpp"

namespace dialex {
namespace {

TEST(Levenshtein, Identity) {
  EXPECT_EQ(levenshtein("Haus", "Haus"), 0u);
  EXPECT_EQ(levenshtein("", ""), 0u);
  EXPECT_EQ(levenshtein("", "abc"), 3u);
}

TEST(Levenshtein, KnownDialectPairs) {
  EXPECT_EQ(levenshtein("Basketballspieler", "Basketboispuia"), 8u);
  EXPECT_EQ(levenshtein("Tochterunternehmen", "Dochdauntanehmen"), 6u);
}

TEST(Levenshtein, FixturePairsMatchTheFullMatrixOracle) {
  for (const auto& [a, b] : std::vector<std::pair<std::string, std::string>>{
           {"zweisprachig", "zwaasprochig"},
           {"zweisprachig", "zwaspråchig"},
           {"zweisprachig", "zwoasprachign"},
           {"zweisprachig", "dreisprochige"},
           {"dazwischen", "dozwischn"}}) {
    EXPECT_EQ(levenshtein(a, b), oracle::edit_distance(a, b)) << a << " / " << b;
  }
  // Frozen oracle values.
  EXPECT_EQ(levenshtein("zweisprachig", "zwaasprochig"), 3u);
  EXPECT_EQ(levenshtein("zweisprachig", "zwaspråchig"), 3u);
  EXPECT_EQ(levenshtein("zweisprachig", "dreisprochige"), 4u);
  EXPECT_EQ(levenshtein("dazwischen", "dozwischn"), 2u);
}

TEST(Levenshtein, CountsCodePointsNotBytes) {
  EXPECT_EQ(levenshtein("a", "å"), 1u);
  EXPECT_EQ(levenshtein("Straße", "Strasse"), 2u);
  EXPECT_EQ(levenshtein("😀", "😁"), 1u);
}

TEST(Levenshtein, RejectsMalformedUtf8) { EXPECT_THROW(levenshtein("ok", "\xFF"), DecodeError); }

TEST(Levenshtein, MetricPropertiesOnRandomTriples) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 2000; ++i) {
    const auto a = oracle::random_string(rng, 12);
    const auto b = oracle::random_string(rng, 12);
    const auto c = oracle::random_string(rng, 12);
    const auto ab = levenshtein(a, b);
    EXPECT_EQ(ab, levenshtein(b, a));
    EXPECT_EQ(ab == 0, a == b);
    EXPECT_LE(levenshtein(a, c), ab + levenshtein(b, c));
    EXPECT_LE(ab, std::max(a.size(), b.size()));
    EXPECT_GE(ab, a.size() > b.size() ? a.size() - b.size() : b.size() - a.size());
  }
}

TEST(LevenshteinBounded, ExactWithinBoundAndSaturatedAbove) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 3000; ++i) {
    const auto a = oracle::random_string(rng, 16);
    const auto b = oracle::random_string(rng, 16);
    const std::size_t bound = rng() % 10;
    const std::size_t exact = oracle::edit_distance(a, b);
    const std::size_t got = levenshtein_bounded(a, b, bound);
    if (exact <= bound) {
      EXPECT_EQ(got, exact);
    } else {
      EXPECT_EQ(got, bound + 1);
    }
  }
}

}  // namespace
}  // namespace dialex
