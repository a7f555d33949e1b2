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

#include <gtest/gtest.h>

#include "dialex/prompts.hpp"
#include "fixtures.hpp"

namespace dialex {
namespace {

constexpr std::string_view kLemma = "dazwischen";
constexpr std::string_view kTerm = "dozwischn";
constexpr std::string_view kContext = "Mia ham dozwischn a kloane Pause gmacht.";

const std::vector<PromptTemplate>& pool() {
  static const auto p = load_prompt_pool(testing::prompts_dir());
  return p;
}

std::vector<int> ids(const std::vector<PromptTemplate>& ts) {
  std::vector<int> out;
  for (const auto& t : ts) out.push_back(t.id);
  return out;
}

TEST(PromptPool, ShippedPoolSizes) {
  EXPECT_EQ(pool().size(), 51u);
  EXPECT_EQ(filter_pool(pool(), Task::kJudge, "en", false).size(), 13u);
  EXPECT_EQ(filter_pool(pool(), Task::kTranslate, "en", false).size(), 22u);
  EXPECT_EQ(ids(filter_pool(pool(), Task::kJudge, "en", true)), (std::vector<int>{2, 3, 5, 6, 8}));
  EXPECT_EQ(ids(filter_pool(pool(), Task::kTranslate, "en", true)), (std::vector<int>{7, 12, 20}));
  EXPECT_EQ(ids(filter_pool(pool(), Task::kJudge, "de", false)), (std::vector<int>{2, 3, 5, 6, 8}));
  EXPECT_EQ(ids(filter_pool(pool(), Task::kTranslate, "de", false)), (std::vector<int>{7, 12, 20}));
}

TEST(PromptPool, MissingDirectoryIsADependencyError) {
  testing::TempDir dir;
  EXPECT_THROW(load_prompt_pool(dir / "absent"), DependencyError);
}

TEST(PromptPool, DuplicateKeysAreRejected) {
  testing::TempDir dir;
  const std::string text = "---\nid: 1\ntask: judge\nlanguage: en\nwith_context: false\n---\nterm_bar term_de\n";
  testing::write_text(dir / "a.txt", text);
  testing::write_text(dir / "b.txt", text);
  EXPECT_THROW(load_prompt_pool(dir.path()), ValidationError);
}

struct GoldenCase {
  Task task;
  std::string language;
  bool with_context;
  int id;
  std::string file;
};

class GoldenRender : public ::testing::TestWithParam<GoldenCase> {};

TEST_P(GoldenRender, MatchesFrozenOutput) {
  const auto& c = GetParam();
  const auto& t = find_template(pool(), c.task, c.language, c.with_context, c.id);
  const auto got = c.with_context ? render_prompt(t, kLemma, kTerm, kContext) : render_prompt(t, kLemma, kTerm);
  EXPECT_EQ(got, testing::read_file(testing::golden_path(c.file)));
}

INSTANTIATE_TEST_SUITE_P(
    Shipped, GoldenRender,
    ::testing::Values(GoldenCase{Task::kJudge, "en", false, 2, "judge_en_02.golden"},
                      GoldenCase{Task::kJudge, "en", false, 5, "judge_en_05.golden"},
                      GoldenCase{Task::kJudge, "en", false, 8, "judge_en_08.golden"},
                      GoldenCase{Task::kTranslate, "en", false, 7, "translate_en_07.golden"},
                      GoldenCase{Task::kTranslate, "en", false, 12, "translate_en_12.golden"},
                      GoldenCase{Task::kTranslate, "en", false, 20, "translate_en_20.golden"},
                      GoldenCase{Task::kJudge, "en", true, 5, "judge_en_ctx_05.golden"},
                      GoldenCase{Task::kTranslate, "en", true, 12, "translate_en_ctx_12.golden"},
                      GoldenCase{Task::kJudge, "de", false, 8, "judge_de_08.golden"},
                      GoldenCase{Task::kTranslate, "de", false, 20, "translate_de_20.golden"}),
    [](const auto& info) { return info.param.file.substr(0, info.param.file.find('.')); });

TEST(ParseTemplate, FrontMatterAndVerbatimBody) {
  const auto t = parse_template(
      "---\nid: 4\ntask: judge\nlanguage: en\nwith_context: false\n---\nIs 'term_bar' 'term_de'?  \n");
  EXPECT_EQ(t.id, 4);
  EXPECT_EQ(t.task, Task::kJudge);
  EXPECT_EQ(t.body, "Is 'term_bar' 'term_de'?  ");
  EXPECT_EQ(t.name(), "judge/en/4");
  EXPECT_EQ(render_prompt(t, "it's", "s'is"), "Is 's'is' 'it's'?  ");
}

TEST(ParseTemplate, SubstitutedTextIsNotRescanned) {
  const auto t = parse_template("---\nid: 0\ntask: judge\n---\nterm_bar / term_de\n");
  EXPECT_EQ(render_prompt(t, "term_bar", "term_de"), "term_de / term_bar");
}

TEST(ParseTemplate, SlotRulesAreEnforced) {
  const auto make = [](std::string header, std::string body) { return "---\n" + header + "---\n" + body; };
  EXPECT_THROW(parse_template(make("id: 1\ntask: judge\n", "only term_de\n")), ValidationError);
  EXPECT_THROW(parse_template(make("id: 1\ntask: judge\n", "only term_bar\n")), ValidationError);
  EXPECT_THROW(parse_template(make("id: 1\ntask: translate\n", "term_bar to term_de\n")), ValidationError);
  EXPECT_THROW(parse_template(make("id: 1\ntask: judge\nwith_context: true\n", "term_bar term_de\n")),
               ValidationError);
  EXPECT_THROW(parse_template(make("id: 1\ntask: judge\n", "term_bar term_de ####\n")), ValidationError);
  EXPECT_NO_THROW(parse_template(make("id: 1\ntask: translate\nwith_context: true\n", "term_bar in ####\n")));
}

TEST(ParseTemplate, MalformedFrontMatter) {
  EXPECT_THROW(parse_template("id: 1\n"), ValidationError);
  EXPECT_THROW(parse_template("---\nid: 1\ntask: judge\nterm_bar term_de\n"), ValidationError);
  EXPECT_THROW(parse_template("---\nid: x\ntask: judge\n---\nterm_bar term_de\n"), ValidationError);
  EXPECT_THROW(parse_template("---\nid: 1\ntask: guess\n---\nterm_bar term_de\n"), ValidationError);
  EXPECT_THROW(parse_template("---\nid: 1\ntask: judge\ncolour: red\n---\nterm_bar term_de\n"), ValidationError);
  EXPECT_THROW(parse_template("---\ntask: judge\n---\nterm_bar term_de\n"), ValidationError);
}

TEST(RenderPrompt, ContextArgumentMustMatchTheTemplate) {
  const auto& plain = find_template(pool(), Task::kJudge, "en", false, 2);
  const auto& ctx = find_template(pool(), Task::kJudge, "en", true, 2);
  EXPECT_THROW(render_prompt(plain, kLemma, kTerm, kContext), ValidationError);
  EXPECT_THROW(render_prompt(ctx, kLemma, kTerm), ValidationError);
  EXPECT_THROW(find_template(pool(), Task::kJudge, "de", true, 2), NotFoundError);
}

}  // namespace
}  // namespace dialex
