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

#include <sys/wait.h>

#include <cstdio>
#include <fstream>

#include <gtest/gtest.h>

#include "dialex.hpp"
#include "fixtures.hpp"
#include "mock_chat_server.hpp"

namespace dialex {
namespace {

namespace fs = std::filesystem;
using testing::MockChatServer;
using testing::MockReply;
using testing::TempDir;

struct Outcome {
  int status = -1;
  std::string out;
  std::string err;
};

std::string quote(const std::string& s) { return "'" + s + "'"; }

Outcome run(const TempDir& dir, const std::vector<std::string>& args) {
  std::string cmd = quote(DIALEX_CLI_PATH);
  for (const auto& a : args) cmd += " " + quote(a);
  const auto err = dir / "stderr.txt";
  cmd += " 2>" + quote(err.string());
  Outcome o;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return o;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) o.out.append(buf, n);
  const int raw = ::pclose(pipe);
  o.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  o.err = testing::read_file(err);
  return o;
}

std::vector<std::string> with_work(const fs::path& work, std::vector<std::string> args) {
  args.insert(args.begin(), {"--work-dir", work.string()});
  return args;
}

// ingest -> vocab -> match -> export-tasks on the bundled toy corpora.
void build_tasks(const TempDir& dir, const fs::path& work, const std::string& threads = "1") {
  const auto a = run(dir, with_work(work, {"--seed", "5", "ingest", "--standard",
                                           testing::data_path("standard_tagged.tsv").string(), "--dialect",
                                           testing::data_path("dialect_wiki.txt").string()}));
  ASSERT_EQ(a.status, 0) << a.err;
  const auto b = run(dir, with_work(work, {"--seed", "5", "vocab", "--n", "50"}));
  ASSERT_EQ(b.status, 0) << b.err;
  const auto c = run(dir, with_work(work, {"--seed", "5", "--threads", threads, "match"}));
  ASSERT_EQ(c.status, 0) << c.err;
  const auto d = run(dir, with_work(work, {"--seed", "5", "export-tasks"}));
  ASSERT_EQ(d.status, 0) << d.err;
  EXPECT_EQ(d.out, "tasks: 500\n");
}

// Three annotators; the first two always agree, the third dissents on every
// fourth pair. Gold cycles yes, inflected, no, no, no by pair position.
void write_annotations(const fs::path& work) {
  std::ifstream in(work / "tasks.tsv");
  const auto tasks = read_dataset_tsv(in);
  std::ofstream log(work / "annotations.jsonl");
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const Label gold = i % 5 == 0 ? Label::kYes : i % 5 == 1 ? Label::kInflected : Label::kNo;
    const Label dissent = gold == Label::kNo ? Label::kYes : Label::kNo;
    for (const char* a : {"a1", "a2", "a3"}) {
      const Label l = std::string(a) == "a3" && i % 4 == 0 ? dissent : gold;
      log << to_json(AnnotationRecord{tasks[i].pair_id, a, l, "2026-01-01T00:00:00Z"}).dump() << '\n';
    }
  }
}

std::string config_for(const MockChatServer& server) {
  return "[paths]\nprompts = " + testing::prompts_dir().string() +
         "\n[endpoint.mock]\nbase_url = " + server.base_url() +
         "\nmodel = mock-model\nretries = 0\nbackoff_ms = 1\nconcurrency = 4\n";
}

TEST(Cli, UsageErrorsExitWithTwo) {
  TempDir dir;
  EXPECT_EQ(run(dir, {}).status, 2);
  EXPECT_EQ(run(dir, {"frobnicate"}).status, 2);
  EXPECT_EQ(run(dir, {"--help"}).status, 0);
  EXPECT_EQ(run(dir, {"score"}).status, 2);
  EXPECT_EQ(run(dir, {"--config", (dir / "absent.ini").string(), "vocab"}).status, 2);
  EXPECT_EQ(run(dir, with_work(dir / "w", {"score", "judgment", "--system", "majority", "--predictions", "x"})).status,
            2);
  testing::write_text(dir / "bad.ini", "[endpoint.m]\nbase_url = http://x\nmodel = m\napi_key = k\n");
  EXPECT_EQ(run(dir, {"--config", (dir / "bad.ini").string(), "vocab"}).status, 2);
}

TEST(Cli, MissingStageInputExitsWithThree) {
  TempDir dir;
  const auto r = run(dir, with_work(dir / "w", {"vocab"}));
  EXPECT_EQ(r.status, 3);
  EXPECT_NE(r.err.find("standard_tokens.tsv"), std::string::npos) << r.err;
  EXPECT_EQ(run(dir, with_work(dir / "w", {"score", "judgment", "--system", "majority"})).status, 3);
  EXPECT_EQ(run(dir, with_work(dir / "w", {"match"})).status, 3);
}

TEST(Cli, PipelineIsDeterministic) {
  TempDir dir;
  build_tasks(dir, dir / "one");
  build_tasks(dir, dir / "two", "3");
  const auto a = testing::read_file(dir / "one" / "candidates.jsonl");
  EXPECT_EQ(a, testing::read_file(dir / "two" / "candidates.jsonl"));
  EXPECT_EQ(testing::read_file(dir / "one" / "tasks.tsv"), testing::read_file(dir / "two" / "tasks.tsv"));
  EXPECT_NE(a.find("\"term\":\"zwaasprochig\""), std::string::npos);
  EXPECT_TRUE(fs::exists(manifest_path(dir / "one" / "candidates.jsonl")));
  const auto m = nlohmann::json::parse(testing::read_file(manifest_path(dir / "one" / "candidates.jsonl")));
  EXPECT_EQ(m["stage"], "match");
  EXPECT_EQ(m["outputs"][(dir / "one" / "candidates.jsonl").string()], sha256_hex(a));
}

TEST(Cli, AnnotateAdjudicateSplitAndBaselines) {
  TempDir dir;
  const auto work = dir / "w";
  build_tasks(dir, work);
  write_annotations(work);
  const auto adj = run(dir, with_work(work, {"adjudicate"}));
  ASSERT_EQ(adj.status, 0) << adj.err;
  EXPECT_NE(adj.out.find("yes: 100, inflected: 100, no: 300, unresolved: 0"), std::string::npos) << adj.out;
  const auto dict = nlohmann::json::parse(testing::read_file(work / "dictionary.json"));
  EXPECT_FALSE(dict.empty());

  const auto split = run(dir, with_work(work, {"--seed", "5", "split", "--dev-size", "100"}));
  ASSERT_EQ(split.status, 0) << split.err;
  std::ifstream in(work / "dataset_split.tsv");
  const auto items = read_dataset_tsv(in);
  std::size_t dev = 0, test = 0, no = 0;
  for (const auto& it : items) {
    dev += it.split == Split::kDev;
    test += it.split == Split::kTest;
    no += it.split == Split::kTest && it.gold == Label::kNo;
  }
  EXPECT_EQ(dev, 100u);
  EXPECT_EQ(test, 400u);

  const auto base = run(dir, with_work(work, {"--seed", "5", "baselines"}));
  ASSERT_EQ(base.status, 0) << base.err;
  for (const char* f : {"summary.csv", "logreg_model.json", "majority.report.json", "random.predictions.jsonl",
                        "ld-threshold.pos.csv", "logreg.ld.csv"}) {
    EXPECT_TRUE(fs::exists(work / "baselines" / f)) << f;
  }

  const auto score = run(dir, with_work(work, {"score", "judgment", "--system", "majority", "--format", "json"}));
  ASSERT_EQ(score.status, 0) << score.err;
  const auto report = nlohmann::json::parse(score.out);
  const double p = static_cast<double>(no) / static_cast<double>(test);
  EXPECT_NEAR(report["overall"].get<double>(), (2.0 * p / (p + 1.0)) / 3.0, 1e-12);
  EXPECT_EQ(report["items"], test);

  const auto hist = run(dir, with_work(work, {"report", "ld-histogram"}));
  ASSERT_EQ(hist.status, 0) << hist.err;
  EXPECT_TRUE(hist.out.starts_with("distance,yes,inflected,no\n"));
}

TEST(Cli, ScoreTwelveItemFixture) {
  TempDir dir;
  std::vector<DatasetItem> items;
  const std::vector<Label> gold{Label::kYes, Label::kYes, Label::kYes, Label::kYes, Label::kInflected,
                                Label::kInflected, Label::kInflected, Label::kNo, Label::kNo, Label::kNo,
                                Label::kNo, Label::kNo};
  for (std::size_t i = 0; i < gold.size(); ++i) {
    items.push_back(testing::make_item(make_pair_id(i), "l" + std::to_string(i), "t" + std::to_string(i), 1 + i % 4,
                                       gold[i], Pos::NOUN, Split::kTest));
  }
  {
    std::ofstream out(dir / "twelve.tsv");
    write_dataset_tsv(out, items);
  }
  const auto r = run(dir, {"score", "judgment", "--dataset", (dir / "twelve.tsv").string(), "--system", "majority",
                           "--out", (dir / "maj").string()});
  ASSERT_EQ(r.status, 0) << r.err;
  // no: P 5/12, R 1, F1 10/17; macro-F1 10/51.
  EXPECT_NE(r.out.find("macro_f1: 0.196"), std::string::npos) << r.out;
  const auto j = nlohmann::json::parse(testing::read_file(dir / "maj.report.json"));
  EXPECT_NEAR(j["overall"].get<double>(), 10.0 / 51.0, 1e-12);
  EXPECT_TRUE(fs::exists(dir / "maj.pos.csv"));

  Prediction first{"p000001", "m", 2, "en", "Yes", "yes", 1.0};
  {
    std::ofstream out(dir / "preds.jsonl");
    const std::vector<Prediction> one{first};
    write_predictions_jsonl(out, one);
  }
  const auto missing = run(dir, {"score", "judgment", "--dataset", (dir / "twelve.tsv").string(), "--predictions",
                                 (dir / "preds.jsonl").string()});
  EXPECT_EQ(missing.status, 1);
  EXPECT_NE(missing.err.find("p000012"), std::string::npos) << missing.err;
}

TEST(Cli, LlmSelectRunAndResume) {
  TempDir dir;
  const auto work = dir / "w";
  build_tasks(dir, work);
  write_annotations(work);
  ASSERT_EQ(run(dir, with_work(work, {"adjudicate"})).status, 0);
  ASSERT_EQ(run(dir, with_work(work, {"split", "--dev-size", "20"})).status, 0);

  // Template 5 is the only one that answers with the gold label.
  std::ifstream in(work / "dataset_split.tsv");
  const auto items = read_dataset_tsv(in);
  const auto pool = load_prompt_pool(testing::prompts_dir());
  std::map<std::string, std::string> answers;
  for (const auto& t : filter_pool(pool, Task::kJudge, "en", false)) {
    for (const auto& it : items) {
      if (!it.gold) continue;
      answers[render_prompt(t, it.lemma, it.term)] = t.id == 5 ? std::string(to_string(*it.gold)) : "no";
    }
  }
  MockChatServer server([&](const std::string& prompt, std::size_t) {
    auto it = answers.find(prompt);
    return MockReply::text(it == answers.end() ? "?" : it->second);
  });
  testing::write_text(dir / "mock.ini", config_for(server));
  const auto cfg = (dir / "mock.ini").string();

  const auto sel = run(dir, with_work(work, {"--config", cfg, "llm-select", "--endpoint", "mock"}));
  ASSERT_EQ(sel.status, 0) << sel.err;
  EXPECT_NE(sel.out.find("best template: 5"), std::string::npos) << sel.out;
  EXPECT_EQ(server.calls(), 13u * 20u);
  const auto scores = work / "llm" / "mock.judge.en.scores.json";
  ASSERT_TRUE(fs::exists(scores));

  MockChatServer flaky([&](const std::string& prompt, std::size_t call) {
    if (call < 3) return MockReply::error(503);
    return MockReply::text(answers.at(prompt));
  });
  testing::write_text(dir / "flaky.ini", config_for(flaky));
  const auto partial = run(dir, with_work(work, {"--config", (dir / "flaky.ini").string(), "llm-run", "--endpoint",
                                                 "mock", "--scores", scores.string()}));
  EXPECT_EQ(partial.status, 4) << partial.err;
  EXPECT_EQ(flaky.calls(), 480u);

  testing::write_text(dir / "healthy.ini", config_for(server));
  const auto before = server.calls();
  const auto resumed = run(dir, with_work(work, {"--config", (dir / "healthy.ini").string(), "llm-run", "--endpoint",
                                                 "mock", "--scores", scores.string()}));
  ASSERT_EQ(resumed.status, 0) << resumed.err;
  EXPECT_EQ(server.calls() - before, 3u);
  const auto preds = work / "llm" / "mock.judge.en.5.predictions.jsonl";
  ASSERT_TRUE(fs::exists(preds));

  const auto score = run(dir, with_work(work, {"score", "judgment", "--predictions", preds.string(), "--format",
                                               "json"}));
  ASSERT_EQ(score.status, 0) << score.err;
  EXPECT_DOUBLE_EQ(nlohmann::json::parse(score.out)["overall"].get<double>(), 1.0);

  const auto again = run(dir, with_work(work, {"--config", (dir / "healthy.ini").string(), "llm-run", "--endpoint",
                                               "mock", "--template-id", "5"}));
  ASSERT_EQ(again.status, 0) << again.err;
  EXPECT_NE(again.out.find("requests 0"), std::string::npos) << again.out;
}

}  // namespace
}  // namespace dialex
