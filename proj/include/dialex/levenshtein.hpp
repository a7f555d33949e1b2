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
#include <cstddef>
#include <numeric>
#include <string_view>
#include <vector>

#include "dialex/unicode.hpp"

namespace dialex {

// Unit-cost edit distance over Unicode scalar values.
inline std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() > b.size()) std::swap(a, b);
  std::vector<std::size_t> row(a.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t j = 1; j <= b.size(); ++j) {
    std::size_t diag = row[0];
    row[0] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
      const std::size_t up = row[i];
      row[i] = std::min({diag + (a[i - 1] != b[j - 1]), up + 1, row[i - 1] + 1});
      diag = up;
    }
  }
  return row[a.size()];
}

inline std::size_t levenshtein(std::string_view a, std::string_view b) {
  return levenshtein(unicode::decode(a), unicode::decode(b));
}

// Exact distance if it is <= bound, otherwise bound + 1. Only the diagonal
// band |i - j| <= bound is evaluated and the scan stops as soon as a whole
// row exceeds the bound.
inline std::size_t levenshtein_bounded(std::u32string_view a, std::u32string_view b,
                                       std::size_t bound) {
  while (!a.empty() && !b.empty() && a.front() == b.front()) {
    a.remove_prefix(1);
    b.remove_prefix(1);
  }
  while (!a.empty() && !b.empty() && a.back() == b.back()) {
    a.remove_suffix(1);
    b.remove_suffix(1);
  }
  if (a.size() > b.size()) std::swap(a, b);
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  const std::size_t inf = bound + 1;
  if (m - n > bound) return inf;
  if (n == 0) return m;

  std::vector<std::size_t> row(m + 1);
  for (std::size_t j = 0; j <= m; ++j) row[j] = j <= bound ? j : inf;

  for (std::size_t i = 1; i <= n; ++i) {
    const std::size_t lo = i > bound ? i - bound : 1;
    const std::size_t hi = std::min(m, i + bound);
    std::size_t diag = row[lo - 1];
    row[lo - 1] = lo == 1 ? std::min(i, inf) : inf;
    std::size_t row_min = row[lo - 1];
    for (std::size_t j = lo; j <= hi; ++j) {
      const std::size_t up = row[j];
      const std::size_t v = std::min({diag + (a[i - 1] != b[j - 1]), up + 1, row[j - 1] + 1});
      diag = up;
      row[j] = std::min(v, inf);
      row_min = std::min(row_min, row[j]);
    }
    if (row_min > bound) return inf;
  }
  return std::min(row[m], inf);
}

}  // namespace dialex
