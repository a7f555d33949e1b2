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

#include <atomic>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "dialex/annotation_store.hpp"
#include "dialex/error.hpp"

namespace dialex {

struct ServiceOptions {
  std::optional<std::filesystem::path> snapshot;  // adjudicated TSV, rewritten periodically
  std::size_t snapshot_every = 100;               // accepted writes between snapshots
};

// JSON API over an AnnotationStore. Handlers may run concurrently; the
// store serializes writes.
class AnnotationService {
 public:
  explicit AnnotationService(AnnotationStore& store, ServiceOptions options = {})
      : store_(store), options_(std::move(options)) {
    mount();
  }

  httplib::Server& server() { return server_; }

  bool listen(const std::string& host, int port) { return server_.listen(host, port); }

  int bind_to_any_port(const std::string& host) { return server_.bind_to_any_port(host); }

  bool listen_after_bind() { return server_.listen_after_bind(); }

  void stop() {
    server_.stop();
    write_snapshot();
  }

  void write_snapshot() {
    if (!options_.snapshot) return;
    std::lock_guard lock(snapshot_mutex_);
    store_.write_snapshot(*options_.snapshot);
  }

  static nlohmann::ordered_json item_json(const DatasetItem& item) {
    return {{"pair_id", item.pair_id},
            {"lemma", item.lemma},
            {"pos_max", to_string(item.pos_max)},
            {"term", item.term},
            {"distance", item.distance},
            {"contexts", item.contexts}};
  }

 private:
  static void reply(httplib::Response& res, int status, const nlohmann::ordered_json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json; charset=utf-8");
  }

  static void fail(httplib::Response& res, int status, const std::string& message) {
    reply(res, status, {{"error", message}});
  }

  static std::optional<nlohmann::json> parse_body(const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception&) {
      fail(res, 400, "malformed JSON body");
      return std::nullopt;
    }
    if (!body.is_object()) {
      fail(res, 400, "request body must be a JSON object");
      return std::nullopt;
    }
    return body;
  }

  static std::optional<std::string> annotator_of(const nlohmann::json& body, httplib::Response& res) {
    const auto it = body.find("annotator");
    if (it == body.end() || !it->is_string() || it->get<std::string>().empty()) {
      fail(res, 400, "field 'annotator' must be a non-empty string");
      return std::nullopt;
    }
    return it->get<std::string>();
  }

  void after_write() {
    if (options_.snapshot && ++writes_ % options_.snapshot_every == 0) write_snapshot();
  }

  void mount() {
    server_.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                 {"Access-Control-Allow-Headers", "Content-Type"},
                                 {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    server_.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server_.Get("/api/tasks/next", [this](const httplib::Request& req, httplib::Response& res) {
      const auto annotator = req.get_param_value("annotator");
      if (annotator.empty()) return fail(res, 400, "query parameter 'annotator' is required");
      const auto item = store_.next_for(annotator);
      if (!item) return reply(res, 200, {{"done", true}, {"annotator_id", annotator}});
      auto body = item_json(*item);
      body["annotator_id"] = annotator;
      body["served_at"] = utc_timestamp();
      body["done"] = false;
      reply(res, 200, body);
    });

    server_.Post(R"(/api/tasks/([^/]+)/label)", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string pair_id = req.matches[1];
      auto body = parse_body(req, res);
      if (!body) return;
      auto annotator = annotator_of(*body, res);
      if (!annotator) return;
      if (!store_.find(pair_id)) return fail(res, 404, "unknown pair_id '" + pair_id + "'");
      const auto label_it = body->find("label");
      if (label_it == body->end()) return fail(res, 422, "field 'label' is required");
      std::optional<Label> label;
      if (!label_it->is_null()) {
        if (label_it->is_string()) label = parse_label(label_it->get<std::string>());
        if (!label) return fail(res, 422, "label must be one of yes, inflected, no");
      }
      try {
        const auto rec = store_.record(pair_id, *annotator, label);
        after_write();
        reply(res, 200, to_json(rec));
      } catch (const NotFoundError& e) {
        fail(res, 404, e.what());
      } catch (const ValidationError& e) {
        fail(res, 422, e.what());
      }
    });

    server_.Post(R"(/api/tasks/([^/]+)/skip)", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string pair_id = req.matches[1];
      auto body = parse_body(req, res);
      if (!body) return;
      auto annotator = annotator_of(*body, res);
      if (!annotator) return;
      try {
        store_.skip(pair_id, *annotator);
      } catch (const NotFoundError& e) {
        return fail(res, 404, e.what());
      }
      reply(res, 200, {{"pair_id", pair_id}, {"annotator_id", *annotator}, {"skipped", true}});
    });

    server_.Get("/api/progress", [this](const httplib::Request&, httplib::Response& res) {
      const auto p = store_.progress();
      const auto counts = [](const std::array<std::size_t, kLabelCount>& c) {
        nlohmann::ordered_json j;
        std::size_t total = 0;
        for (Label l : kAllLabels) {
          j[std::string(to_string(l))] = c[index(l)];
          total += c[index(l)];
        }
        j["total"] = total;
        return j;
      };
      nlohmann::ordered_json per_annotator = nlohmann::ordered_json::object();
      for (const auto& [annotator, c] : p.per_annotator) per_annotator[annotator] = counts(c);
      reply(res, 200,
            {{"total_pairs", p.total_pairs},
             {"labeled_pairs", p.labeled_pairs},
             {"total_records", p.total_records},
             {"per_label", counts(p.per_label)},
             {"per_annotator", per_annotator}});
    });

    server_.Get("/api/agreement", [this](const httplib::Request&, httplib::Response& res) {
      const auto a = store_.agreement();
      reply(res, 200,
            {{"fleiss_kappa", a.kappa ? nlohmann::ordered_json(*a.kappa) : nlohmann::ordered_json()},
             {"defined", a.kappa.has_value()},
             {"items", a.items},
             {"annotators", a.annotators}});
    });

    server_.Get(R"(/api/pairs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string pair_id = req.matches[1];
      const auto item = store_.find(pair_id);
      if (!item) return fail(res, 404, "unknown pair_id '" + pair_id + "'");
      auto body = item_json(*item);
      nlohmann::ordered_json labels = nlohmann::ordered_json::object();
      std::vector<Label> votes;
      for (const auto& [annotator, label] : store_.labels_for(pair_id)) {
        labels[annotator] = to_string(label);
        votes.push_back(label);
      }
      body["labels"] = labels;
      if (votes.empty()) {
        body["gold"] = nullptr;
      } else if (auto gold = adjudicate(votes)) {
        body["gold"] = to_string(*gold);
      } else {
        body["gold"] = "unresolved";
      }
      reply(res, 200, body);
    });
  }

  AnnotationStore& store_;
  ServiceOptions options_;
  httplib::Server server_;
  std::mutex snapshot_mutex_;
  std::atomic<std::size_t> writes_{0};
};

}  // namespace dialex
