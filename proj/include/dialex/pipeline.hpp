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

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dialex/annotation_store.hpp"
#include "dialex/baselines.hpp"
#include "dialex/config.hpp"
#include "dialex/corpus.hpp"
#include "dialex/dataset.hpp"
#include "dialex/manifest.hpp"
#include "dialex/matcher.hpp"
#include "dialex/llm_runner.hpp"
#include "dialex/metrics.hpp"
#include "dialex/vocab.hpp"

namespace dialex {

// File names of the stage artifacts inside a work directory.
struct WorkLayout {
  std::filesystem::path dir;

  std::filesystem::path standard_tokens() const { return dir / "standard_tokens.tsv"; }
  std::filesystem::path dialect_sentences() const { return dir / "dialect_sentences.jsonl"; }
  std::filesystem::path standard_vocab() const { return dir / "standard_vocab.tsv"; }
  std::filesystem::path dialect_vocab() const { return dir / "dialect_vocab.tsv"; }
  std::filesystem::path candidates() const { return dir / "candidates.jsonl"; }
  std::filesystem::path tasks() const { return dir / "tasks.tsv"; }
  std::filesystem::path annotations() const { return dir / "annotations.jsonl"; }
  std::filesystem::path dataset() const { return dir / "dataset.tsv"; }
  std::filesystem::path dictionary() const { return dir / "dictionary.json"; }
  std::filesystem::path agreement() const { return dir / "agreement.json"; }
  std::filesystem::path split_dataset() const { return dir / "dataset_split.tsv"; }
  std::filesystem::path baselines_dir() const { return dir / "baselines"; }
};

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DependencyError(path.string());
  return in;
}

// Writes through a temporary file so readers never see a partial artifact.
inline void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    body(out);
    out.flush();
    if (!out) throw Error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

inline nlohmann::ordered_json to_json(const SentenceRecord& s) {
  return {{"doc_id", s.doc_id}, {"sentence_index", s.sentence_index}, {"text", s.text}};
}

inline std::vector<SentenceRecord> read_sentences_jsonl(std::istream& in) {
  std::vector<SentenceRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back({j.at("doc_id").get<std::string>(), j.at("sentence_index").get<std::size_t>(),
                     j.at("text").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, std::string("sentence record: ") + e.what());
    }
  }
  return out;
}

template <typename T, typename Reader>
std::vector<T> read_artifact(const std::filesystem::path& path, Reader&& reader) {
  auto in = open_input(path);
  return reader(in);
}

struct IngestStats {
  std::size_t tokens = 0;
  std::size_t standard_sentences = 0;
  std::size_t dialect_sentences = 0;
};

// Validates both corpora and stores them in normalized form.
inline IngestStats run_ingest(const AppConfig& cfg, const WorkLayout& work) {
  if (cfg.paths.standard_corpus.empty()) throw ConfigError("standard corpus path is not set");
  if (cfg.paths.dialect_corpus.empty()) throw ConfigError("dialect corpus path is not set");
  RunManifest m{"ingest", to_json(cfg), {}, {}, utc_timestamp(), {}};
  m.add_input(cfg.paths.standard_corpus);
  m.add_input(cfg.paths.dialect_corpus);
  IngestStats stats;
  write_file(work.standard_tokens(), [&](std::ostream& out) {
    auto in = open_input(cfg.paths.standard_corpus);
    std::optional<SentenceRef> prev;
    for_each_tagged_token(in, cfg.paths.standard_corpus.stem().string(), [&](TaggedToken&& t) {
      if (!prev || prev->doc_id != t.sentence.doc_id) {
        if (prev) out << '\n';
        out << "# newdoc id = " << t.sentence.doc_id << '\n';
        ++stats.standard_sentences;
      } else if (prev->sentence_index != t.sentence.sentence_index) {
        out << '\n';
        ++stats.standard_sentences;
      }
      out << t.surface << '\t' << t.lemma << '\t' << to_string(t.upos) << '\n';
      prev = t.sentence;
      ++stats.tokens;
    });
  });
  write_file(work.dialect_sentences(), [&](std::ostream& out) {
    auto in = open_input(cfg.paths.dialect_corpus);
    for_each_dialect_sentence(in, cfg.dialect_format, cfg.paths.dialect_corpus.stem().string(),
                              [&](SentenceRecord&& s) {
                                out << to_json(s).dump() << '\n';
                                ++stats.dialect_sentences;
                              });
  });
  m.add_output(work.standard_tokens());
  m.add_output(work.dialect_sentences());
  write_manifests(m);
  return stats;
}

struct VocabStats {
  std::size_t standard = 0;
  std::size_t dialect_all = 0;
  std::size_t dialect_filtered = 0;
};

inline VocabStats run_vocab(const AppConfig& cfg, const WorkLayout& work) {
  RunManifest m{"vocab", to_json(cfg), {}, {}, utc_timestamp(), {}};
  m.add_input(work.standard_tokens());
  m.add_input(work.dialect_sentences());
  LemmaCounter lemmas;
  {
    auto in = open_input(work.standard_tokens());
    for_each_tagged_token(in, "doc", [&](TaggedToken&& t) { lemmas.add(t); });
  }
  const auto standard = lemmas.top(cfg.pipeline.n);
  TermCounter terms;
  for (const auto& s : read_artifact<SentenceRecord>(work.dialect_sentences(), [](auto& in) {
         return read_sentences_jsonl(in);
       })) {
    terms.add_sentence(s.text);
  }
  const auto dialect_all = terms.entries();
  const auto dialect = filter_shared(dialect_all, lemma_set(standard), cfg.fold_case_filter);
  write_file(work.standard_vocab(), [&](std::ostream& out) { write_standard_vocab(out, standard); });
  write_file(work.dialect_vocab(), [&](std::ostream& out) { write_dialect_vocab(out, dialect); });
  m.add_output(work.standard_vocab());
  m.add_output(work.dialect_vocab());
  write_manifests(m);
  return {standard.size(), dialect_all.size(), dialect.size()};
}

struct MatchStats {
  std::size_t lemmas = 0;
  std::size_t pairs = 0;
  std::size_t truncated_rows = 0;
};

inline MatchStats run_match(const AppConfig& cfg, const WorkLayout& work) {
  RunManifest m{"match", to_json(cfg), {}, {}, utc_timestamp(), {}};
  m.add_input(work.standard_vocab());
  m.add_input(work.dialect_vocab());
  m.add_input(work.dialect_sentences());
  const auto standard =
      read_artifact<LemmaEntry>(work.standard_vocab(), [](auto& in) { return read_standard_vocab(in); });
  const auto dialect =
      read_artifact<DialectTermEntry>(work.dialect_vocab(), [](auto& in) { return read_dialect_vocab(in); });
  const auto sentences =
      read_artifact<SentenceRecord>(work.dialect_sentences(), [](auto& in) { return read_sentences_jsonl(in); });
  const CorpusIndex corpus(sentences, cfg.pipeline.c);
  const auto rows = build_candidate_table(standard, dialect, corpus, cfg.pipeline, cfg.index, cfg.threads);
  MatchStats stats;
  stats.lemmas = rows.size();
  for (const auto& r : rows) {
    stats.pairs += r.pairs.size();
    stats.truncated_rows += r.truncated ? 1 : 0;
  }
  write_file(work.candidates(), [&](std::ostream& out) { write_candidates_jsonl(out, rows); });
  m.add_output(work.candidates());
  write_manifests(m);
  return stats;
}

inline std::size_t run_export_tasks(const AppConfig& cfg, const WorkLayout& work) {
  RunManifest m{"export-tasks", to_json(cfg), {}, {}, utc_timestamp(), {}};
  m.add_input(work.candidates());
  const auto pairs =
      read_artifact<CandidatePair>(work.candidates(), [](auto& in) { return read_candidates_jsonl(in); });
  const auto items = items_from_candidates(pairs);
  write_file(work.tasks(), [&](std::ostream& out) { write_dataset_tsv(out, items); });
  m.add_output(work.tasks());
  write_manifests(m);
  return items.size();
}

// Tasks with the lemma frequencies used for task ordering.
inline std::vector<DatasetItem> load_tasks(const std::filesystem::path& tasks,
                                           const std::optional<std::filesystem::path>& standard_vocab) {
  auto items = read_artifact<DatasetItem>(tasks, [](auto& in) { return read_dataset_tsv(in); });
  if (standard_vocab) {
    std::map<std::string, std::uint64_t> freq;
    for (const auto& e :
         read_artifact<LemmaEntry>(*standard_vocab, [](auto& in) { return read_standard_vocab(in); })) {
      freq[e.lemma] = e.freq;
    }
    for (auto& item : items) {
      auto it = freq.find(item.lemma);
      if (it != freq.end()) item.lemma_freq = it->second;
    }
  }
  return items;
}

struct AdjudicationStats {
  std::size_t records = 0;
  std::array<std::size_t, kLabelCount> gold{};
  std::size_t unresolved = 0;
  std::size_t unlabeled = 0;
  AgreementReport agreement;
};

inline AdjudicationStats run_adjudicate(const AppConfig& cfg, const WorkLayout& work,
                                        const std::optional<std::filesystem::path>& log = std::nullopt) {
  const auto log_path = log.value_or(work.annotations());
  RunManifest m{"adjudicate", to_json(cfg), {}, {}, utc_timestamp(), {}};
  m.add_input(work.tasks());
  m.add_input(log_path);
  AnnotationStore store(read_artifact<DatasetItem>(work.tasks(), [](auto& in) { return read_dataset_tsv(in); }));
  const auto records =
      read_artifact<AnnotationRecord>(log_path, [](auto& in) { return read_annotation_log(in); });
  for (const auto& r : records) store.record(r);
  const auto items = store.adjudicated();
  AdjudicationStats stats;
  stats.records = store.progress().total_records;
  for (const auto& it : items) {
    if (it.gold) {
      ++stats.gold[index(*it.gold)];
    } else if (it.unresolved) {
      ++stats.unresolved;
    } else {
      ++stats.unlabeled;
    }
  }
  stats.agreement = store.agreement();
  write_file(work.dataset(), [&](std::ostream& out) { write_dataset_tsv(out, items); });
  write_file(work.dictionary(), [&](std::ostream& out) { out << to_json(compile_dictionary(items)).dump(2) << '\n'; });
  write_file(work.agreement(), [&](std::ostream& out) {
    nlohmann::ordered_json j;
    j["fleiss_kappa"] = stats.agreement.kappa ? nlohmann::ordered_json(*stats.agreement.kappa) : nlohmann::ordered_json();
    j["items"] = stats.agreement.items;
    j["annotators"] = stats.agreement.annotators;
    out << j.dump(2) << '\n';
  });
  m.add_output(work.dataset());
  m.add_output(work.dictionary());
  m.add_output(work.agreement());
  write_manifests(m);
  return stats;
}

// Splits the gold-labeled items; unlabeled and unresolved items stay
// unassigned. Item order is preserved.
inline std::vector<DatasetItem> assign_splits(std::vector<DatasetItem> items, std::size_t dev_size,
                                              std::uint64_t seed) {
  std::vector<DatasetItem> gold;
  std::vector<std::size_t> where;
  for (std::size_t i = 0; i < items.size(); ++i) {
    items[i].split = Split::kUnassigned;
    if (items[i].gold) {
      gold.push_back(items[i]);
      where.push_back(i);
    }
  }
  gold = split_dev_test(std::move(gold), dev_size, seed);
  for (std::size_t j = 0; j < gold.size(); ++j) items[where[j]].split = gold[j].split;
  return items;
}

inline std::size_t run_split(const AppConfig& cfg, const WorkLayout& work) {
  RunManifest m{"split", to_json(cfg), {}, {}, utc_timestamp(), {}};
  m.add_input(work.dataset());
  auto items = read_artifact<DatasetItem>(work.dataset(), [](auto& in) { return read_dataset_tsv(in); });
  items = assign_splits(std::move(items), cfg.dev_size, cfg.pipeline.seed);
  write_file(work.split_dataset(), [&](std::ostream& out) { write_dataset_tsv(out, items); });
  m.add_output(work.split_dataset());
  write_manifests(m);
  return items.size();
}

// Predictions of a non-LLM system in the common predictions format.
inline std::vector<Prediction> baseline_predictions(BaselineKind kind, std::span<const DatasetItem> items,
                                                    std::uint64_t seed, const LogRegModel* model) {
  const auto labels = run_baseline(kind, items, seed, model);
  std::vector<Prediction> out;
  out.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    const std::string label(to_string(labels[i]));
    out.push_back({items[i].pair_id, std::string(to_string(kind)), 0, "baseline", label, label, 0.0});
  }
  return out;
}

inline std::vector<DatasetItem> gold_items(std::span<const DatasetItem> items, std::optional<Split> split) {
  std::vector<DatasetItem> out;
  for (const auto& it : items) {
    if (it.gold && (!split || it.split == *split)) out.push_back(it);
  }
  return out;
}

inline void write_report_files(const EvaluationReport& r, const std::filesystem::path& prefix) {
  write_file(prefix.string() + ".report.json", [&](std::ostream& out) { out << to_json(r).dump(2) << '\n'; });
  write_file(prefix.string() + ".report.txt", [&](std::ostream& out) { write_report_text(out, r); });
  write_file(prefix.string() + ".pos.csv", [&](std::ostream& out) { write_groups_csv(out, r, "pos"); });
  write_file(prefix.string() + ".ld.csv", [&](std::ostream& out) { write_groups_csv(out, r, "ld"); });
}

// Trains the regression on dev and scores all four systems on test.
inline std::vector<EvaluationReport> run_baselines(const AppConfig& cfg, const WorkLayout& work) {
  RunManifest m{"baselines", to_json(cfg), {}, {}, utc_timestamp(), {}};
  m.add_input(work.split_dataset());
  const auto items = read_artifact<DatasetItem>(work.split_dataset(), [](auto& in) { return read_dataset_tsv(in); });
  const auto dev = gold_items(items, Split::kDev);
  const auto test = gold_items(items, Split::kTest);
  if (test.empty()) throw PipelineError("no gold-labeled test items; run split first");
  const auto model = train_logreg(dev, cfg.logreg);
  const auto dir = work.baselines_dir();
  write_file(dir / "logreg_model.json", [&](std::ostream& out) { out << to_json(model).dump(2) << '\n'; });
  m.add_output(dir / "logreg_model.json");
  std::vector<EvaluationReport> reports;
  for (auto kind : {BaselineKind::kRandom, BaselineKind::kLdThreshold, BaselineKind::kMajority, BaselineKind::kLogReg}) {
    const std::string name(to_string(kind));
    const auto preds = baseline_predictions(kind, test, cfg.pipeline.seed, &model);
    write_file(dir / (name + ".predictions.jsonl"), [&](std::ostream& out) { write_predictions_jsonl(out, preds); });
    auto report = score_judgment(name, test, judgment_predictions(preds));
    write_report_files(report, dir / name);
    m.add_output(dir / (name + ".predictions.jsonl"));
    m.add_output(dir / (name + ".report.json"));
    reports.push_back(std::move(report));
  }
  write_file(dir / "summary.csv", [&](std::ostream& out) {
    out << "system,macro_f1,overall_pos_mean,if_error_rate\n";
    for (const auto& r : reports) {
      out << r.system << ',' << detail::fixed(r.overall, 6) << ',' << detail::fixed(r.pos_mean, 6) << ','
          << detail::fixed(r.if_error_rate, 6) << '\n';
    }
  });
  m.add_output(dir / "summary.csv");
  write_manifests(m);
  return reports;
}

}  // namespace dialex
