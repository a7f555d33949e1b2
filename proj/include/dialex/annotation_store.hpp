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

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "dialex/dataset.hpp"
#include "dialex/error.hpp"
#include "dialex/label.hpp"

namespace dialex {

struct AnnotationRecord {
  std::string pair_id;
  std::string annotator_id;
  std::optional<Label> label;  // nullopt retracts an earlier label
  std::string ts;

  bool operator==(const AnnotationRecord&) const = default;
};

inline std::string utc_timestamp(std::chrono::system_clock::time_point t = std::chrono::system_clock::now()) {
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(t.time_since_epoch()).count() % 1000;
  const std::time_t secs = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

inline nlohmann::ordered_json to_json(const AnnotationRecord& r) {
  nlohmann::ordered_json j;
  j["pair_id"] = r.pair_id;
  j["annotator_id"] = r.annotator_id;
  j["label"] = r.label ? nlohmann::ordered_json(std::string(to_string(*r.label))) : nlohmann::ordered_json(nullptr);
  j["ts"] = r.ts;
  return j;
}

inline AnnotationRecord annotation_from_json(const nlohmann::json& j, std::size_t line_no) {
  try {
    AnnotationRecord r;
    r.pair_id = j.at("pair_id").get<std::string>();
    r.annotator_id = j.at("annotator_id").get<std::string>();
    const auto& l = j.at("label");
    if (!l.is_null()) {
      r.label = parse_label(l.get<std::string>());
      if (!r.label) throw ParseError(line_no, "invalid label in annotation log");
    }
    r.ts = j.value("ts", std::string());
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(line_no, std::string("annotation record: ") + e.what());
  }
}

// Records of a log file in order; an unterminated final line is ignored.
inline std::vector<AnnotationRecord> read_annotation_log(std::istream& in) {
  std::vector<AnnotationRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    if (in.eof()) break;
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, std::string("annotation log: ") + e.what());
    }
    out.push_back(annotation_from_json(j, line_no));
  }
  return out;
}

struct ProgressReport {
  std::size_t total_pairs = 0;
  std::size_t labeled_pairs = 0;  // pairs with at least one label
  std::size_t total_records = 0;  // deduplicated (pair, annotator) labels
  std::map<std::string, std::array<std::size_t, kLabelCount>> per_annotator;
  std::array<std::size_t, kLabelCount> per_label{};
};

struct AgreementReport {
  std::optional<double> kappa;
  std::size_t items = 0;
  std::vector<std::string> annotators;
};

// Judgment store backed by an append-only JSONL log. Construction replays the
// log; each accepted write is appended and fsynced before it becomes visible.
class AnnotationStore {
 public:
  using Labels = std::map<std::string, Label>;  // annotator -> label

  explicit AnnotationStore(std::vector<DatasetItem> items, std::filesystem::path log_path = {})
      : items_(std::move(items)), log_path_(std::move(log_path)) {
    for (std::size_t i = 0; i < items_.size(); ++i) {
      if (!index_.emplace(items_[i].pair_id, i).second) {
        throw ValidationError("duplicate pair_id '" + items_[i].pair_id + "'");
      }
    }
    order_.resize(items_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      const auto& x = items_[a];
      const auto& y = items_[b];
      if (x.lemma_freq != y.lemma_freq) return x.lemma_freq > y.lemma_freq;
      if (x.distance != y.distance) return x.distance < y.distance;
      return x.pair_id < y.pair_id;
    });
    if (!log_path_.empty()) {
      replay();
      fd_ = ::open(log_path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
      if (fd_ < 0) throw Error("cannot open annotation log " + log_path_.string() + ": " + std::strerror(errno));
    }
  }

  AnnotationStore(const AnnotationStore&) = delete;
  AnnotationStore& operator=(const AnnotationStore&) = delete;

  ~AnnotationStore() {
    if (fd_ >= 0) ::close(fd_);
  }

  std::size_t size() const { return items_.size(); }

  std::optional<DatasetItem> find(const std::string& pair_id) const {
    auto it = index_.find(pair_id);
    if (it == index_.end()) return std::nullopt;
    return items_[it->second];
  }

  // Stores (or overwrites) one judgment. A record without a label retracts.
  AnnotationRecord record(AnnotationRecord r) {
    if (r.annotator_id.empty()) throw ValidationError("annotator id must not be empty");
    std::unique_lock lock(mutex_);
    if (!index_.contains(r.pair_id)) throw NotFoundError("unknown pair_id '" + r.pair_id + "'");
    if (r.ts.empty()) r.ts = utc_timestamp();
    append(r);
    apply(r);
    return r;
  }

  AnnotationRecord record(const std::string& pair_id, const std::string& annotator,
                          std::optional<Label> label) {
    return record(AnnotationRecord{pair_id, annotator, label, {}});
  }

  void skip(const std::string& pair_id, const std::string& annotator) {
    std::unique_lock lock(mutex_);
    if (!index_.contains(pair_id)) throw NotFoundError("unknown pair_id '" + pair_id + "'");
    skipped_[annotator].insert(pair_id);
  }

  // Next pair in task order this annotator has neither labeled nor skipped.
  std::optional<DatasetItem> next_for(const std::string& annotator) const {
    std::shared_lock lock(mutex_);
    const auto skipped = skipped_.find(annotator);
    for (std::size_t i : order_) {
      const auto& item = items_[i];
      auto lab = labels_.find(item.pair_id);
      if (lab != labels_.end() && lab->second.contains(annotator)) continue;
      if (skipped != skipped_.end() && skipped->second.contains(item.pair_id)) continue;
      return item;
    }
    return std::nullopt;
  }

  std::map<std::string, Labels> labels() const {
    std::shared_lock lock(mutex_);
    return labels_;
  }

  Labels labels_for(const std::string& pair_id) const {
    std::shared_lock lock(mutex_);
    auto it = labels_.find(pair_id);
    return it == labels_.end() ? Labels{} : it->second;
  }

  ProgressReport progress() const {
    std::shared_lock lock(mutex_);
    ProgressReport p;
    p.total_pairs = items_.size();
    for (const auto& [pair, by_annotator] : labels_) {
      if (by_annotator.empty()) continue;
      ++p.labeled_pairs;
      for (const auto& [annotator, label] : by_annotator) {
        ++p.total_records;
        ++p.per_label[index(label)];
        ++p.per_annotator[annotator][index(label)];
      }
    }
    return p;
  }

  // Kappa over the pairs labeled by every annotator seen so far.
  AgreementReport agreement() const {
    std::shared_lock lock(mutex_);
    AgreementReport report;
    std::set<std::string> annotators;
    for (const auto& [pair, by_annotator] : labels_) {
      for (const auto& entry : by_annotator) annotators.insert(entry.first);
    }
    report.annotators.assign(annotators.begin(), annotators.end());
    if (annotators.size() < 2) return report;
    std::vector<std::vector<Label>> matrix;
    for (const auto& [pair, by_annotator] : labels_) {
      if (by_annotator.size() != annotators.size()) continue;
      std::vector<Label> row;
      for (const auto& entry : by_annotator) row.push_back(entry.second);
      matrix.push_back(std::move(row));
    }
    report.items = matrix.size();
    if (!matrix.empty()) report.kappa = fleiss_kappa(matrix);
    return report;
  }

  // Items with gold labels from strict-majority adjudication.
  std::vector<DatasetItem> adjudicated() const {
    std::shared_lock lock(mutex_);
    std::vector<DatasetItem> out = items_;
    for (auto& item : out) {
      item.gold.reset();
      item.unresolved = false;
      auto it = labels_.find(item.pair_id);
      if (it == labels_.end() || it->second.empty()) continue;
      std::vector<Label> votes;
      for (const auto& entry : it->second) votes.push_back(entry.second);
      item.gold = adjudicate(votes);
      item.unresolved = !item.gold;
    }
    return out;
  }

  void write_snapshot(const std::filesystem::path& path) const {
    const auto items = adjudicated();
    const auto tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error("cannot write snapshot " + tmp);
      write_dataset_tsv(out, items);
      if (!out.flush()) throw Error("cannot write snapshot " + tmp);
    }
    std::filesystem::rename(tmp, path);
  }

 private:
  void replay() {
    std::ifstream in(log_path_, std::ios::binary);
    if (!in) return;
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < content.size()) {
      const auto nl = content.find('\n', pos);
      // A final line without newline was never acknowledged.
      if (nl == std::string::npos) break;
      ++line_no;
      const std::string_view line(content.data() + pos, nl - pos);
      pos = nl + 1;
      if (line.empty()) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(line_no, std::string("annotation log: ") + e.what());
      }
      auto r = annotation_from_json(j, line_no);
      if (!index_.contains(r.pair_id)) {
        throw ParseError(line_no, "annotation log names unknown pair_id '" + r.pair_id + "'");
      }
      apply(r);
    }
    if (pos < content.size()) {
      std::filesystem::resize_file(log_path_, pos);
    }
  }

  void append(const AnnotationRecord& r) {
    if (fd_ < 0) return;
    const std::string line = to_json(r).dump() + "\n";
    std::size_t written = 0;
    while (written < line.size()) {
      const auto n = ::write(fd_, line.data() + written, line.size() - written);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error(std::string("annotation log write failed: ") + std::strerror(errno));
      }
      written += static_cast<std::size_t>(n);
    }
    if (::fsync(fd_) != 0) throw Error(std::string("annotation log fsync failed: ") + std::strerror(errno));
  }

  void apply(const AnnotationRecord& r) {
    auto& by_annotator = labels_[r.pair_id];
    if (r.label) {
      by_annotator[r.annotator_id] = *r.label;
    } else {
      by_annotator.erase(r.annotator_id);
      if (by_annotator.empty()) labels_.erase(r.pair_id);
    }
  }

  std::vector<DatasetItem> items_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::size_t> order_;
  std::map<std::string, Labels> labels_;
  std::map<std::string, std::set<std::string>> skipped_;
  std::filesystem::path log_path_;
  int fd_ = -1;
  mutable std::shared_mutex mutex_;
};

}  // namespace dialex
