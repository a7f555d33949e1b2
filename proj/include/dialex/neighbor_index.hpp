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
#include <concepts>
#include <cstdint>
#include <map>
#include <queue>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dialex/error.hpp"
#include "dialex/levenshtein.hpp"
#include "dialex/random.hpp"
#include "dialex/unicode.hpp"
#include "dialex/vocab.hpp"

namespace dialex {

using TermId = std::uint32_t;

struct Neighbor {
  TermId term = 0;
  std::size_t distance = 0;

  bool operator==(const Neighbor&) const = default;
};

// Immutable term storage shared by the index implementations.
class TermTable {
 public:
  explicit TermTable(std::span<const DialectTermEntry> vocab) {
    if (vocab.empty()) throw ValidationError("cannot index an empty vocabulary");
    utf8_.reserve(vocab.size());
    cps_.reserve(vocab.size());
    freq_.reserve(vocab.size());
    for (const auto& e : vocab) {
      utf8_.push_back(e.surface);
      cps_.push_back(unicode::decode(e.surface));
      freq_.push_back(e.freq);
    }
  }

  std::size_t size() const { return utf8_.size(); }
  const std::string& utf8(TermId id) const { return utf8_[id]; }
  const std::u32string& codepoints(TermId id) const { return cps_[id]; }
  std::uint64_t freq(TermId id) const { return freq_[id]; }

 private:
  std::vector<std::string> utf8_;
  std::vector<std::u32string> cps_;
  std::vector<std::uint64_t> freq_;
};

namespace detail {

// Tracks the k smallest distances seen so far.
class KthTracker {
 public:
  explicit KthTracker(std::size_t k) : k_(k) {}

  bool full() const { return heap_.size() == k_; }
  // Largest distance still worth keeping; unbounded until k values were seen.
  std::size_t threshold(std::size_t fallback) const { return full() ? heap_.top() : fallback; }

  void offer(std::size_t d) {
    if (!full()) {
      heap_.push(d);
    } else if (d < heap_.top()) {
      heap_.pop();
      heap_.push(d);
    }
  }

 private:
  std::size_t k_;
  std::priority_queue<std::size_t> heap_;
};

inline std::vector<Neighbor> keep_within(std::vector<Neighbor> found, std::size_t limit) {
  std::erase_if(found, [&](const Neighbor& n) { return n.distance > limit; });
  return found;
}

}  // namespace detail

// Terms bucketed by length. A query visits buckets in order of increasing
// length difference (a lower bound on the distance) and evaluates each term
// with a banded DP capped at the current k-th best distance.
class LengthBandedIndex {
 public:
  explicit LengthBandedIndex(std::span<const DialectTermEntry> vocab) : terms_(vocab) {
    for (TermId id = 0; id < terms_.size(); ++id) {
      buckets_[terms_.codepoints(id).size()].push_back(id);
    }
  }

  std::size_t size() const { return terms_.size(); }
  const TermTable& terms() const { return terms_; }

  // Every term whose distance to `query` is <= the k-th smallest distance.
  std::vector<Neighbor> within_kth(std::u32string_view query, std::size_t k) const {
    std::vector<Neighbor> found;
    detail::KthTracker kth(k);
    const std::size_t qlen = query.size();
    const std::size_t max_len = buckets_.rbegin()->first;
    const std::size_t max_delta = std::max(qlen, max_len);
    auto scan = [&](const std::vector<TermId>& ids) {
      for (TermId id : ids) {
        const auto& t = terms_.codepoints(id);
        const std::size_t bound = kth.threshold(std::max(qlen, t.size()));
        const std::size_t d = levenshtein_bounded(query, t, bound);
        if (d <= bound) {
          found.push_back({id, d});
          kth.offer(d);
        }
      }
    };
    for (std::size_t delta = 0; delta <= max_delta; ++delta) {
      if (kth.full() && delta > kth.threshold(0)) break;
      if (delta <= qlen) {
        if (auto it = buckets_.find(qlen - delta); it != buckets_.end()) scan(it->second);
      }
      if (delta > 0) {
        if (auto it = buckets_.find(qlen + delta); it != buckets_.end()) scan(it->second);
      }
    }
    return detail::keep_within(std::move(found), kth.threshold(max_delta));
  }

  // Every term within `radius` of `query`.
  std::vector<Neighbor> within(std::u32string_view query, std::size_t radius) const {
    std::vector<Neighbor> found;
    const std::size_t qlen = query.size();
    auto lo = buckets_.lower_bound(qlen > radius ? qlen - radius : 0);
    auto hi = buckets_.upper_bound(qlen + radius);
    for (auto it = lo; it != hi; ++it) {
      for (TermId id : it->second) {
        const std::size_t d = levenshtein_bounded(query, terms_.codepoints(id), radius);
        if (d <= radius) found.push_back({id, d});
      }
    }
    return found;
  }

 private:
  TermTable terms_;
  std::map<std::size_t, std::vector<TermId>> buckets_;
};

// Burkhard-Keller tree over the same term table.
class BkTree {
 public:
  explicit BkTree(std::span<const DialectTermEntry> vocab) : terms_(vocab) {
    nodes_.reserve(terms_.size());
    nodes_.push_back({0, {}});
    for (TermId id = 1; id < terms_.size(); ++id) insert(id);
  }

  std::size_t size() const { return terms_.size(); }
  const TermTable& terms() const { return terms_; }

  std::vector<Neighbor> within_kth(std::u32string_view query, std::size_t k) const {
    std::vector<Neighbor> found;
    detail::KthTracker kth(k);
    const std::size_t unbounded = std::numeric_limits<std::size_t>::max() / 2;
    std::vector<std::size_t> stack{0};
    while (!stack.empty()) {
      const Node& node = nodes_[stack.back()];
      stack.pop_back();
      const std::size_t d = levenshtein(query, terms_.codepoints(node.term));
      const std::size_t limit = kth.threshold(unbounded);
      if (d <= limit) {
        found.push_back({node.term, d});
        kth.offer(d);
      }
      const std::size_t r = kth.threshold(unbounded);
      for (const auto& [edge, child] : node.children) {
        if (edge + r >= d && edge <= d + r) stack.push_back(child);
      }
    }
    return detail::keep_within(std::move(found), kth.threshold(unbounded));
  }

  std::vector<Neighbor> within(std::u32string_view query, std::size_t radius) const {
    std::vector<Neighbor> found;
    std::vector<std::size_t> stack{0};
    while (!stack.empty()) {
      const Node& node = nodes_[stack.back()];
      stack.pop_back();
      const std::size_t d = levenshtein(query, terms_.codepoints(node.term));
      if (d <= radius) found.push_back({node.term, d});
      for (const auto& [edge, child] : node.children) {
        if (edge + radius >= d && edge <= d + radius) stack.push_back(child);
      }
    }
    return found;
  }

 private:
  struct Node {
    TermId term;
    std::map<std::size_t, std::size_t> children;
  };

  void insert(TermId id) {
    std::size_t cur = 0;
    for (;;) {
      const std::size_t d = levenshtein(terms_.codepoints(id), terms_.codepoints(nodes_[cur].term));
      auto it = nodes_[cur].children.find(d);
      if (it == nodes_[cur].children.end()) {
        nodes_.push_back({id, {}});
        nodes_[cur].children.emplace(d, nodes_.size() - 1);
        return;
      }
      cur = it->second;
    }
  }

  TermTable terms_;
  std::vector<Node> nodes_;
};

template <class T>
concept NeighborIndex = requires(const T& index, std::u32string_view q, std::size_t k) {
  { index.within_kth(q, k) } -> std::same_as<std::vector<Neighbor>>;
  { index.within(q, k) } -> std::same_as<std::vector<Neighbor>>;
  { index.size() } -> std::convertible_to<std::size_t>;
  { index.terms() } -> std::same_as<const TermTable&>;
};

struct KnnResult {
  std::vector<Neighbor> neighbors;  // rank order: distance, then selection order
  bool truncated = false;           // vocabulary holds fewer than k terms
};

// The k nearest terms. Terms strictly closer than the k-th distance are always
// returned; if the k-th distance is shared by more terms than there are slots
// left, the slots are filled by a uniform draw from that tie group. The tie
// group is ordered by code points before drawing, so the result depends only
// on (vocabulary, query, k, rng state) and not on the index type.
template <NeighborIndex Index>
KnnResult knn(std::u32string_view query, const Index& index, std::size_t k, std::mt19937_64& rng) {
  if (k == 0) throw ValidationError("k must be positive");
  const TermTable& terms = index.terms();
  auto candidates = index.within_kth(query, k);
  std::sort(candidates.begin(), candidates.end(), [&](const Neighbor& a, const Neighbor& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return terms.codepoints(a.term) < terms.codepoints(b.term);
  });
  KnnResult result;
  result.truncated = index.size() < k;
  if (candidates.size() <= k) {
    result.neighbors = std::move(candidates);
    return result;
  }
  const std::size_t boundary = candidates[k - 1].distance;
  auto tie_begin = std::find_if(candidates.begin(), candidates.end(),
                                [&](const Neighbor& n) { return n.distance == boundary; });
  result.neighbors.assign(candidates.begin(), tie_begin);
  std::vector<Neighbor> ties(tie_begin, candidates.end());
  const std::size_t slots = k - result.neighbors.size();
  for (std::size_t i = 0; i < slots; ++i) {
    const auto j = i + uniform_index(rng, ties.size() - i);
    std::swap(ties[i], ties[j]);
    result.neighbors.push_back(ties[i]);
  }
  return result;
}

template <NeighborIndex Index>
KnnResult knn(std::string_view query, const Index& index, std::size_t k, std::mt19937_64& rng) {
  return knn(std::u32string_view(unicode::decode(query)), index, k, rng);
}

}  // namespace dialex
