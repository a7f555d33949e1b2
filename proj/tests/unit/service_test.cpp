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

#include <thread>

#include <gtest/gtest.h>

#include "dialex/service.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

namespace dialex {
namespace {

using nlohmann::json;

std::vector<DatasetItem> pairs(std::size_t n) {
  std::vector<DatasetItem> out;
  for (std::size_t i = 0; i < n; ++i) {
    auto it = testing::make_item(make_pair_id(i), "Lemma" + std::to_string(i), "Term" + std::to_string(i), 1 + i % 3);
    it.contexts = {"Satz mit Term" + std::to_string(i)};
    it.lemma_freq = 1000 - i;
    out.push_back(std::move(it));
  }
  return out;
}

class Running {
 public:
  Running(AnnotationStore& store, ServiceOptions options = {}) : service_(store, std::move(options)) {
    port_ = service_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { service_.listen_after_bind(); });
    service_.server().wait_until_ready();
  }
  ~Running() {
    service_.stop();
    thread_.join();
  }

  httplib::Client client() const { return httplib::Client("127.0.0.1", port_); }

  json get(const std::string& path, int expected = 200) const {
    auto res = client().Get(path);
    EXPECT_TRUE(res);
    if (!res) return {};
    EXPECT_EQ(res->status, expected) << path << ": " << res->body;
    return json::parse(res->body);
  }

  json post(const std::string& path, const std::string& body, int expected = 200) const {
    auto res = client().Post(path, body, "application/json");
    EXPECT_TRUE(res);
    if (!res) return {};
    EXPECT_EQ(res->status, expected) << path << ": " << res->body;
    return json::parse(res->body);
  }

  json label(const std::string& pair, const std::string& annotator, json label, int expected = 200) const {
    return post("/api/tasks/" + pair + "/label", json{{"annotator", annotator}, {"label", label}}.dump(), expected);
  }

 private:
  AnnotationService service_;
  int port_ = 0;
  std::thread thread_;
};

TEST(Service, NextTaskServesItemsInPriorityOrder) {
  AnnotationStore store(pairs(3));
  Running api(store);
  auto next = api.get("/api/tasks/next?annotator=anna");
  EXPECT_EQ(next["pair_id"], "p000001");
  EXPECT_EQ(next["lemma"], "Lemma0");
  EXPECT_EQ(next["term"], "Term0");
  EXPECT_EQ(next["contexts"][0], "Satz mit Term0");
  EXPECT_EQ(next["done"], false);
  api.label("p000001", "anna", "yes");
  api.post("/api/tasks/p000002/skip", R"({"annotator":"anna"})");
  EXPECT_EQ(api.get("/api/tasks/next?annotator=anna")["pair_id"], "p000003");
  api.label("p000003", "anna", "no");
  EXPECT_EQ(api.get("/api/tasks/next?annotator=anna")["done"], true);
  EXPECT_EQ(api.get("/api/tasks/next?annotator=ben")["pair_id"], "p000001");
}

TEST(Service, ValidationStatusCodes) {
  AnnotationStore store(pairs(2));
  Running api(store);
  api.get("/api/tasks/next", 400);
  api.post("/api/tasks/p000001/label", "{not json", 400);
  api.post("/api/tasks/p000001/label", "[1,2]", 400);
  api.post("/api/tasks/p000001/label", R"({"label":"yes"})", 400);
  api.post("/api/tasks/p000001/label", R"({"annotator":"","label":"yes"})", 400);
  api.label("p999999", "anna", "yes", 404);
  api.post("/api/tasks/p999999/skip", R"({"annotator":"anna"})", 404);
  api.get("/api/pairs/p999999", 404);
  api.post("/api/tasks/p000001/label", R"({"annotator":"anna"})", 422);
  api.label("p000001", "anna", "maybe", 422);
  api.label("p000001", "anna", 3, 422);
  const auto progress = api.get("/api/progress");
  EXPECT_EQ(progress["total_records"], 0);
  EXPECT_EQ(progress["labeled_pairs"], 0);
}

TEST(Service, OverwriteRetractAndPairView) {
  AnnotationStore store(pairs(2));
  Running api(store);
  const auto rec = api.label("p000001", "anna", "yes");
  EXPECT_EQ(rec["pair_id"], "p000001");
  EXPECT_EQ(rec["annotator_id"], "anna");
  EXPECT_EQ(rec["label"], "yes");
  api.label("p000001", "anna", "inflected");
  api.label("p000001", "ben", "inflected");
  auto pair = api.get("/api/pairs/p000001");
  EXPECT_EQ(pair["labels"], (json{{"anna", "inflected"}, {"ben", "inflected"}}));
  EXPECT_EQ(pair["gold"], "inflected");
  api.label("p000001", "ben", "no");
  EXPECT_EQ(api.get("/api/pairs/p000001")["gold"], "unresolved");
  api.label("p000001", "ben", nullptr);
  api.label("p000001", "anna", nullptr);
  pair = api.get("/api/pairs/p000001");
  EXPECT_TRUE(pair["labels"].empty());
  EXPECT_TRUE(pair["gold"].is_null());
  EXPECT_EQ(api.get("/api/progress")["labeled_pairs"], 0);
}

TEST(Service, AgreementMatchesTheFormula) {
  AnnotationStore store(pairs(10));
  Running api(store);
  const auto none = api.get("/api/agreement");
  EXPECT_FALSE(none["defined"]);
  EXPECT_TRUE(none["fleiss_kappa"].is_null());

  const std::vector<std::string> a{"yes", "no", "no", "inflected", "yes", "no", "no", "yes", "no", "inflected"};
  const std::vector<std::string> b{"yes", "no", "yes", "inflected", "yes", "no", "inflected", "yes", "no", "no"};
  std::vector<std::vector<int>> ratings;
  for (std::size_t i = 0; i < 10; ++i) {
    api.label(make_pair_id(i), "anna", a[i]);
    api.label(make_pair_id(i), "ben", b[i]);
    ratings.push_back({static_cast<int>(index(*parse_label(a[i]))), static_cast<int>(index(*parse_label(b[i])))});
  }
  const auto agreement = api.get("/api/agreement");
  ASSERT_TRUE(agreement["defined"]);
  EXPECT_EQ(agreement["items"], 10);
  EXPECT_EQ(agreement["annotators"], (json{"anna", "ben"}));
  EXPECT_NEAR(agreement["fleiss_kappa"].get<double>(), oracle::fleiss_kappa(ratings, 3), 1e-12);

  const auto progress = api.get("/api/progress");
  EXPECT_EQ(progress["total_records"], 20);
  EXPECT_EQ(progress["labeled_pairs"], 10);
  EXPECT_EQ(progress["per_annotator"]["anna"]["no"], 5);
  EXPECT_EQ(progress["per_annotator"]["ben"]["total"], 10);
  EXPECT_EQ(progress["per_label"]["yes"], 7);
}

TEST(Service, StateSurvivesRestartAndSnapshotIsWritten) {
  testing::TempDir dir;
  ServiceOptions options;
  options.snapshot = dir / "snapshot.tsv";
  options.snapshot_every = 2;
  {
    AnnotationStore store(pairs(4), dir / "annotations.jsonl");
    Running api(store, options);
    api.label("p000001", "anna", "yes");
    api.label("p000001", "ben", "yes");
    EXPECT_TRUE(std::filesystem::exists(dir / "snapshot.tsv"));
    api.label("p000002", "anna", "no");
  }
  std::ifstream snap(dir / "snapshot.tsv");
  const auto items = read_dataset_tsv(snap);
  ASSERT_EQ(items.size(), 4u);
  EXPECT_EQ(items[0].gold, Label::kYes);
  EXPECT_EQ(items[1].gold, Label::kNo);

  AnnotationStore again(pairs(4), dir / "annotations.jsonl");
  Running api(again);
  const auto progress = api.get("/api/progress");
  EXPECT_EQ(progress["total_records"], 3);
  EXPECT_EQ(api.get("/api/pairs/p000001")["gold"], "yes");
}

TEST(Service, CorsHeadersAndPreflight) {
  AnnotationStore store(pairs(1));
  Running api(store);
  auto client = api.client();
  auto res = client.Options("/api/tasks/p000001/label");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 204);
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");
  auto get = client.Get("/api/progress");
  ASSERT_TRUE(get);
  EXPECT_EQ(get->get_header_value("Access-Control-Allow-Origin"), "*");
  EXPECT_NE(get->get_header_value("Content-Type").find("application/json"), std::string::npos);
}

TEST(Service, ConcurrentAnnotators) {
  AnnotationStore store(pairs(30));
  Running api(store);
  std::vector<std::jthread> workers;
  for (int w = 0; w < 3; ++w) {
    workers.emplace_back([&api, w] {
      auto client = api.client();
      const std::string who = "a" + std::to_string(w);
      for (;;) {
        auto next = client.Get("/api/tasks/next?annotator=" + who);
        if (!next || next->status != 200) return;
        const auto body = json::parse(next->body);
        if (body["done"]) return;
        client.Post("/api/tasks/" + body["pair_id"].get<std::string>() + "/label",
                    json{{"annotator", who}, {"label", "no"}}.dump(), "application/json");
      }
    });
  }
  workers.clear();
  const auto progress = api.get("/api/progress");
  EXPECT_EQ(progress["total_records"], 90);
  const auto agreement = api.get("/api/agreement");
  EXPECT_EQ(agreement["items"], 30);
  EXPECT_FALSE(agreement["defined"]);
}

}  // namespace
}  // namespace dialex
