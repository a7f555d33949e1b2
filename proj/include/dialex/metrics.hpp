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
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "dialex/dataset.hpp"
#include "dialex/error.hpp"
#include "dialex/label.hpp"
#include "dialex/prompts.hpp"
#include "dialex/random.hpp"
#include "dialex/unicode.hpp"

namespace dialex {

// Predictions keyed by pair_id; nullopt marks an instruction-following error.
using JudgmentPredictions = std::unordered_map<std::string, std::optional<Label>>;
using TranslationPredictions = std::unordered_map<std::string, std::optional<std::string>>;

enum class IfErrorPolicy {
  kMapToNo,      // an IF error counts as a 'no' prediction
  kCountAsWrong  // an IF error is a miss for its gold class and predicts nothing
};

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
  std::size_t predicted = 0;
  std::size_t true_positives = 0;
};

struct ConfusionMatrix {
  std::array<std::array<std::size_t, kLabelCount>, kLabelCount> counts{};  // [predicted][actual]
  std::array<std::size_t, kLabelCount> if_errors{};                         // [actual]

  std::size_t column_total(Label actual) const {
    std::size_t sum = if_errors[index(actual)];
    for (const auto& row : counts) sum += row[index(actual)];
    return sum;
  }

  std::size_t total() const {
    std::size_t sum = 0;
    for (Label l : kAllLabels) sum += column_total(l);
    return sum;
  }

  std::size_t diagonal() const {
    std::size_t sum = 0;
    for (std::size_t k = 0; k < kLabelCount; ++k) sum += counts[k][k];
    return sum;
  }

  // Rows yes, inflected, no, IF; each column is a share of that gold class.
  std::array<std::array<double, kLabelCount>, kLabelCount + 1> column_percentages() const {
    std::array<std::array<double, kLabelCount>, kLabelCount + 1> pct{};
    for (Label a : kAllLabels) {
      const auto total = column_total(a);
      if (total == 0) continue;
      const double t = static_cast<double>(total);
      for (std::size_t p = 0; p < kLabelCount; ++p) pct[p][index(a)] = 100.0 * static_cast<double>(counts[p][index(a)]) / t;
      pct[kLabelCount][index(a)] = 100.0 * static_cast<double>(if_errors[index(a)]) / t;
    }
    return pct;
  }
};

struct GroupRow {
  std::string group;
  std::size_t items = 0;
  double metric = 0.0;
  double if_error_rate = 0.0;
};

struct EvaluationReport {
  std::string system;
  Task task = Task::kJudge;
  IfErrorPolicy policy = IfErrorPolicy::kMapToNo;
  double overall = 0.0;           // macro-F1 over all items, or accuracy
  double pos_mean = 0.0;          // unweighted mean over the per-POS rows
  double accuracy = 0.0;          // exact label / word accuracy, IF errors wrong
  double lenient_accuracy = 0.0;  // translation only, case-folded; diagnostics
  std::array<ClassScores, kLabelCount> per_class{};
  std::size_t items = 0;
  std::size_t if_errors = 0;
  double if_error_rate = 0.0;
  ConfusionMatrix confusion;
  std::vector<GroupRow> per_pos;
  std::vector<GroupRow> per_ld;
  std::string item_fingerprint;

  std::string metric_name() const { return task == Task::kJudge ? "macro_f1" : "accuracy"; }
};

namespace detail {

inline double safe_div(double a, double b) { return b == 0.0 ? 0.0 : a / b; }

inline std::string fingerprint(std::vector<std::string> ids) {
  std::sort(ids.begin(), ids.end());
  std::uint64_t h = fnv1a64("");
  for (const auto& id : ids) {
    h = fnv1a64(id, h);
    h = fnv1a64("\n", h);
  }
  return hex64(h) + ":" + std::to_string(ids.size());
}

struct JudgmentCore {
  std::array<ClassScores, kLabelCount> per_class{};
  ConfusionMatrix confusion;
  double macro_f1 = 0.0;
  std::size_t if_errors = 0;
};

inline JudgmentCore judgment_core(std::span<const DatasetItem* const> items,
                                  const JudgmentPredictions& preds, IfErrorPolicy policy) {
  JudgmentCore core;
  for (const auto* item : items) {
    const Label gold = *item->gold;
    const auto& outcome = preds.at(item->pair_id);
    ++core.per_class[index(gold)].support;
    if (!outcome) {
      ++core.if_errors;
      ++core.confusion.if_errors[index(gold)];
      if (policy == IfErrorPolicy::kCountAsWrong) continue;
    } else {
      ++core.confusion.counts[index(*outcome)][index(gold)];
    }
    const Label predicted = outcome.value_or(Label::kNo);
    ++core.per_class[index(predicted)].predicted;
    if (predicted == gold) ++core.per_class[index(gold)].true_positives;
  }
  double sum = 0.0;
  for (auto& c : core.per_class) {
    const double tp = static_cast<double>(c.true_positives);
    c.precision = safe_div(tp, static_cast<double>(c.predicted));
    c.recall = safe_div(tp, static_cast<double>(c.support));
    c.f1 = safe_div(2.0 * c.precision * c.recall, c.precision + c.recall);
    sum += c.f1;
  }
  core.macro_f1 = sum / static_cast<double>(kLabelCount);
  return core;
}

template <typename Metric>
std::vector<GroupRow> group_rows(const std::map<std::string, std::vector<const DatasetItem*>>& groups,
                                 Metric&& metric) {
  std::vector<GroupRow> rows;
  for (const auto& [name, members] : groups) {
    if (members.empty()) continue;
    auto [value, if_errors] = metric(members);
    rows.push_back({name, members.size(), value,
                    static_cast<double>(if_errors) / static_cast<double>(members.size())});
  }
  return rows;
}

inline std::string ld_key(std::size_t d) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%03zu", d);
  return buf;
}

// Groups keyed so that map order is the display order; LD keys are
// zero-padded here and unpadded when rows are emitted.
inline void unpad_ld(std::vector<GroupRow>& rows) {
  for (auto& r : rows) r.group = std::to_string(std::stoul(r.group));
}

inline void sort_pos_rows(std::vector<GroupRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const GroupRow& a, const GroupRow& b) {
    if (a.items != b.items) return a.items > b.items;
    return a.group < b.group;
  });
}

inline double mean_metric(const std::vector<GroupRow>& rows) {
  if (rows.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : rows) sum += r.metric;
  return sum / static_cast<double>(rows.size());
}

template <typename Map>
void require_predictions(std::span<const DatasetItem> gold, const Map& preds) {
  std::vector<std::string> missing;
  for (const auto& item : gold) {
    if (!preds.contains(item.pair_id)) missing.push_back(item.pair_id);
  }
  if (!missing.empty()) throw MissingPredictionsError(std::move(missing));
}

}  // namespace detail

// Gold items must carry a gold label; items without one are rejected.
inline EvaluationReport score_judgment(std::string system, std::span<const DatasetItem> gold,
                                       const JudgmentPredictions& preds,
                                       IfErrorPolicy policy = IfErrorPolicy::kMapToNo) {
  detail::require_predictions(gold, preds);
  std::vector<const DatasetItem*> all;
  std::map<std::string, std::vector<const DatasetItem*>> by_pos, by_ld;
  std::vector<std::string> ids;
  for (const auto& item : gold) {
    if (!item.gold) throw ValidationError("item " + item.pair_id + " has no gold label");
    all.push_back(&item);
    ids.push_back(item.pair_id);
    by_pos[std::string(to_string(item.pos_max))].push_back(&item);
    if (*item.gold != Label::kNo) by_ld[detail::ld_key(item.distance)].push_back(&item);
  }
  EvaluationReport r;
  r.system = std::move(system);
  r.task = Task::kJudge;
  r.policy = policy;
  r.items = all.size();
  r.item_fingerprint = detail::fingerprint(std::move(ids));
  const auto core = detail::judgment_core(all, preds, policy);
  r.per_class = core.per_class;
  r.confusion = core.confusion;
  r.overall = core.macro_f1;
  r.if_errors = core.if_errors;
  r.if_error_rate = detail::safe_div(static_cast<double>(core.if_errors), static_cast<double>(r.items));
  r.accuracy = detail::safe_div(static_cast<double>(core.confusion.diagonal()), static_cast<double>(r.items));
  r.per_pos = detail::group_rows(by_pos, [&](const auto& members) {
    const auto c = detail::judgment_core(members, preds, policy);
    return std::pair(c.macro_f1, c.if_errors);
  });
  detail::sort_pos_rows(r.per_pos);
  r.pos_mean = detail::mean_metric(r.per_pos);
  // Per-LD rows score only the yes/inflected items, by accuracy.
  r.per_ld = detail::group_rows(by_ld, [&](const auto& members) {
    std::size_t correct = 0, if_errors = 0;
    for (const auto* item : members) {
      const auto& outcome = preds.at(item->pair_id);
      if (!outcome) ++if_errors;
      if (outcome == item->gold) ++correct;
    }
    return std::pair(static_cast<double>(correct) / static_cast<double>(members.size()), if_errors);
  });
  detail::unpad_ld(r.per_ld);
  return r;
}

// Exact match after NFC normalization; case-sensitive.
inline bool translation_matches(std::string_view output, std::string_view reference) {
  return unicode::nfc(output) == unicode::nfc(reference);
}

inline EvaluationReport score_translation(std::string system, std::span<const DatasetItem> gold,
                                          const TranslationPredictions& preds) {
  detail::require_predictions(gold, preds);
  std::map<std::string, std::vector<const DatasetItem*>> by_pos, by_ld;
  std::vector<std::string> ids;
  for (const auto& item : gold) {
    ids.push_back(item.pair_id);
    by_pos[std::string(to_string(item.pos_max))].push_back(&item);
    by_ld[detail::ld_key(item.distance)].push_back(&item);
  }
  const auto accuracy_of = [&](const auto& members) {
    std::size_t correct = 0, if_errors = 0;
    for (const auto* item : members) {
      const auto& out = preds.at(item->pair_id);
      if (!out) {
        ++if_errors;
      } else if (translation_matches(*out, item->lemma)) {
        ++correct;
      }
    }
    return std::pair(detail::safe_div(static_cast<double>(correct), static_cast<double>(members.size())),
                     if_errors);
  };
  EvaluationReport r;
  r.system = std::move(system);
  r.task = Task::kTranslate;
  r.items = gold.size();
  r.item_fingerprint = detail::fingerprint(std::move(ids));
  std::vector<const DatasetItem*> all;
  std::size_t lenient = 0;
  for (const auto& item : gold) {
    all.push_back(&item);
    const auto& out = preds.at(item.pair_id);
    if (out && unicode::fold_case(unicode::nfc(*out)) == unicode::fold_case(unicode::nfc(item.lemma))) ++lenient;
  }
  const auto [acc, if_errors] = accuracy_of(all);
  r.overall = acc;
  r.accuracy = acc;
  r.if_errors = if_errors;
  r.if_error_rate = detail::safe_div(static_cast<double>(if_errors), static_cast<double>(r.items));
  r.lenient_accuracy = detail::safe_div(static_cast<double>(lenient), static_cast<double>(r.items));
  r.per_pos = detail::group_rows(by_pos, accuracy_of);
  detail::sort_pos_rows(r.per_pos);
  r.pos_mean = detail::mean_metric(r.per_pos);
  r.per_ld = detail::group_rows(by_ld, accuracy_of);
  detail::unpad_ld(r.per_ld);
  return r;
}

struct DeltaRow {
  std::string system;
  double delta_metric = 0.0;
  double delta_if_error = 0.0;
};

// b minus a; both reports must cover the same items for the same task.
inline DeltaRow delta_report(const EvaluationReport& a, const EvaluationReport& b) {
  if (a.task != b.task) throw ValidationError("delta between different tasks");
  if (a.item_fingerprint != b.item_fingerprint) {
    throw ValidationError("delta between reports over different item sets (" + a.item_fingerprint + " vs " +
                          b.item_fingerprint + ")");
  }
  return {b.system.empty() ? a.system : b.system, b.overall - a.overall, b.if_error_rate - a.if_error_rate};
}

using LdHistogram = std::map<std::size_t, std::array<std::size_t, kLabelCount>>;

inline LdHistogram ld_histogram(std::span<const DatasetItem> items) {
  LdHistogram h;
  for (const auto& item : items) {
    if (item.gold) ++h[item.distance][index(*item.gold)];
  }
  return h;
}

inline nlohmann::ordered_json to_json(const GroupRow& g) {
  return {{"group", g.group}, {"items", g.items}, {"metric", g.metric}, {"if_error_rate", g.if_error_rate}};
}

inline nlohmann::ordered_json to_json(const EvaluationReport& r) {
  nlohmann::ordered_json j;
  j["system"] = r.system;
  j["task"] = to_string(r.task);
  j["metric"] = r.metric_name();
  j["if_error_policy"] = r.policy == IfErrorPolicy::kMapToNo ? "map-to-no" : "count-as-wrong";
  j["items"] = r.items;
  j["item_fingerprint"] = r.item_fingerprint;
  j["overall"] = r.overall;
  j["overall_pos_mean"] = r.pos_mean;
  j["accuracy"] = r.accuracy;
  j["if_errors"] = r.if_errors;
  j["if_error_rate"] = r.if_error_rate;
  if (r.task == Task::kJudge) {
    auto& pc = j["per_class"];
    for (Label l : kAllLabels) {
      const auto& c = r.per_class[index(l)];
      pc[std::string(to_string(l))] = {{"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1},
                                       {"support", c.support},     {"predicted", c.predicted}};
    }
    auto& cm = j["confusion"];
    const auto pct = r.confusion.column_percentages();
    for (std::size_t p = 0; p <= kLabelCount; ++p) {
      const std::string row = p < kLabelCount ? std::string(to_string(kAllLabels[p])) : "IF";
      for (Label a : kAllLabels) {
        const auto n = p < kLabelCount ? r.confusion.counts[p][index(a)] : r.confusion.if_errors[index(a)];
        cm["counts"][row][std::string(to_string(a))] = n;
        cm["column_percent"][row][std::string(to_string(a))] = pct[p][index(a)];
      }
    }
  } else {
    j["lenient_accuracy"] = r.lenient_accuracy;
  }
  j["per_pos"] = nlohmann::ordered_json::array();
  for (const auto& g : r.per_pos) j["per_pos"].push_back(to_json(g));
  j["per_ld"] = nlohmann::ordered_json::array();
  for (const auto& g : r.per_ld) j["per_ld"].push_back(to_json(g));
  return j;
}

namespace detail {

inline std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string pad(std::string s, std::size_t width) {
  const auto len = unicode::length(s);
  if (len < width) s.insert(0, width - len, ' ');
  return s;
}

}  // namespace detail

inline void write_report_text(std::ostream& out, const EvaluationReport& r) {
  using detail::fixed;
  using detail::pad;
  out << "system: " << r.system << "\ntask: " << to_string(r.task) << "\nitems: " << r.items << '\n';
  out << r.metric_name() << ": " << fixed(r.overall) << "\n" << r.metric_name() << " (mean over POS): "
      << fixed(r.pos_mean) << "\nIF error rate: " << fixed(r.if_error_rate) << '\n';
  if (r.task == Task::kJudge) {
    out << "\n" << pad("class", 10) << pad("P", 8) << pad("R", 8) << pad("F1", 8) << pad("support", 9) << '\n';
    for (Label l : kAllLabels) {
      const auto& c = r.per_class[index(l)];
      out << pad(std::string(to_string(l)), 10) << pad(fixed(c.precision), 8) << pad(fixed(c.recall), 8)
          << pad(fixed(c.f1), 8) << pad(std::to_string(c.support), 9) << '\n';
    }
    out << "\nconfusion (% of gold column)\n" << pad("", 10);
    for (Label a : kAllLabels) out << pad(std::string(to_string(a)), 11);
    out << '\n';
    const auto pct = r.confusion.column_percentages();
    for (std::size_t p = 0; p <= kLabelCount; ++p) {
      out << pad(p < kLabelCount ? std::string(to_string(kAllLabels[p])) : "IF Error", 10);
      for (Label a : kAllLabels) out << pad(fixed(pct[p][index(a)], 2), 11);
      out << '\n';
    }
  } else {
    out << "lenient accuracy (case-folded): " << fixed(r.lenient_accuracy) << '\n';
  }
  const auto table = [&](const char* title, const std::vector<GroupRow>& rows) {
    out << '\n' << title << '\n' << pad("group", 8) << pad("items", 9) << pad(r.metric_name(), 10) << pad("IF", 8) << '\n';
    for (const auto& g : rows) {
      out << pad(g.group, 8) << pad(std::to_string(g.items), 9) << pad(fixed(g.metric), 10)
          << pad(fixed(g.if_error_rate), 8) << '\n';
    }
  };
  table("by POS", r.per_pos);
  table(r.task == Task::kJudge ? "by LD (yes/inflected only, accuracy)" : "by LD", r.per_ld);
}

inline void write_groups_csv(std::ostream& out, const EvaluationReport& r, std::string_view grouping) {
  const auto& rows = grouping == "ld" ? r.per_ld : r.per_pos;
  out << "system,grouping,group,items,metric,value,if_error_rate\n";
  for (const auto& g : rows) {
    out << r.system << ',' << grouping << ',' << g.group << ',' << g.items << ',' << r.metric_name() << ','
        << detail::fixed(g.metric, 6) << ',' << detail::fixed(g.if_error_rate, 6) << '\n';
  }
}

inline void write_delta_csv(std::ostream& out, std::span<const DeltaRow> rows) {
  out << "system,delta_metric,delta_if_error\n";
  for (const auto& d : rows) {
    out << d.system << ',' << detail::fixed(d.delta_metric, 6) << ',' << detail::fixed(d.delta_if_error, 6) << '\n';
  }
}

inline void write_ld_histogram_csv(std::ostream& out, const LdHistogram& h) {
  out << "distance,yes,inflected,no\n";
  for (const auto& [d, counts] : h) {
    out << d << ',' << counts[0] << ',' << counts[1] << ',' << counts[2] << '\n';
  }
}

}  // namespace dialex
