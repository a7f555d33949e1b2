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

// dialex: command-line driver for the dictionary-induction and evaluation
// pipeline. Exit status: 0 ok, 1 error, 2 usage, 3 missing stage input,
// 4 partial results.

#include <csignal>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "dialex.hpp"

namespace fs = std::filesystem;
using namespace dialex;

namespace {

constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDependency = 3;
constexpr int kExitPartial = 4;

struct Globals {
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> config;
  std::optional<fs::path> work_dir;
  std::optional<unsigned> threads;
};

struct Options {
  // ingest
  std::optional<fs::path> standard, dialect;
  std::optional<std::string> dialect_format;
  // vocab / match
  std::optional<std::size_t> n, k, contexts, window;
  bool fold_case_filter = false;
  std::optional<std::string> index;
  // serve
  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<fs::path> tasks, vocab, log, snapshot;
  std::size_t snapshot_every = 100;
  // adjudicate / split / baselines
  std::optional<fs::path> annotations;
  std::optional<std::size_t> dev_size;
  std::optional<double> learning_rate, l2;
  std::optional<std::size_t> max_iterations;
  // llm-select / llm-run
  std::string endpoint;
  std::string task = "judge";
  std::string language = "en";
  bool with_context = false;
  std::optional<fs::path> dataset, out, cache, scores;
  std::optional<int> template_id;
  std::string split = "test";
  // score / report
  std::string score_task;
  std::optional<std::string> system;
  std::optional<fs::path> predictions, model;
  std::string if_errors = "map-to-no";
  std::string format = "text";
  std::optional<fs::path> a, b;
};

AppConfig load(const Globals& g, const Options& o) {
  AppConfig cfg = g.config ? load_config(*g.config) : AppConfig{};
  if (g.seed) cfg.pipeline.seed = *g.seed;
  if (g.work_dir) cfg.paths.work_dir = *g.work_dir;
  if (g.threads) cfg.threads = std::max(1u, *g.threads);
  if (o.standard) cfg.paths.standard_corpus = *o.standard;
  if (o.dialect) cfg.paths.dialect_corpus = *o.dialect;
  if (o.dialect_format) {
    auto f = parse_dialect_format(*o.dialect_format);
    if (!f) throw ConfigError("unknown dialect format '" + *o.dialect_format + "'");
    cfg.dialect_format = *f;
  }
  if (o.n) cfg.pipeline.n = *o.n;
  if (o.k) cfg.pipeline.k = *o.k;
  if (o.contexts) cfg.pipeline.c = *o.contexts;
  if (o.window) cfg.pipeline.window = *o.window;
  if (o.fold_case_filter) cfg.fold_case_filter = true;
  if (o.index) {
    auto k = parse_index_kind(*o.index);
    if (!k) throw ConfigError("unknown index '" + *o.index + "'");
    cfg.index = *k;
  }
  if (o.dev_size) cfg.dev_size = *o.dev_size;
  if (o.learning_rate) cfg.logreg.learning_rate = *o.learning_rate;
  if (o.l2) cfg.logreg.l2 = *o.l2;
  if (o.max_iterations) cfg.logreg.max_iterations = *o.max_iterations;
  cfg.pipeline.validate();
  return cfg;
}

std::optional<Split> parse_split_arg(const std::string& s) {
  if (s == "all") return std::nullopt;
  auto split = parse_split(s);
  if (!split || *split == Split::kUnassigned) throw ConfigError("split must be dev, test or all");
  return split;
}

std::vector<DatasetItem> load_dataset(const fs::path& path) {
  auto in = open_input(path);
  return load_released_dataset(in);
}

Task task_arg(const std::string& s) {
  auto t = parse_task(s);
  if (!t) throw ConfigError("task must be judge or translate");
  return *t;
}

int cmd_serve(const AppConfig& cfg, const Options& o) {
  const WorkLayout work{cfg.paths.work_dir};
  const auto tasks = o.tasks.value_or(work.tasks());
  std::optional<fs::path> vocab = o.vocab;
  if (!vocab && fs::exists(work.standard_vocab())) vocab = work.standard_vocab();
  AnnotationStore store(load_tasks(tasks, vocab), o.log.value_or(work.annotations()));
  AnnotationService service(store, {o.snapshot, std::max<std::size_t>(1, o.snapshot_every)});

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  std::jthread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    service.stop();
  });

  std::cout << "serving " << store.size() << " pairs on http://" << o.host << ':' << o.port << std::endl;
  if (!service.listen(o.host, o.port)) {
    std::cerr << "dialex: cannot listen on " << o.host << ':' << o.port << '\n';
    pthread_kill(waiter.native_handle(), SIGTERM);
    return kExitError;
  }
  return 0;
}

fs::path llm_dir(const AppConfig& cfg) { return fs::path(cfg.paths.work_dir) / "llm"; }

std::string variant_name(const Options& o) { return o.with_context ? o.language + "+context" : o.language; }

int cmd_llm_select(const AppConfig& cfg, const Options& o) {
  const auto& ep = cfg.endpoint(o.endpoint);
  const Task task = task_arg(o.task);
  const WorkLayout work{cfg.paths.work_dir};
  const auto items = load_dataset(o.dataset.value_or(work.split_dataset()));
  const auto dev = gold_items(items, Split::kDev);
  const auto pool = filter_pool(load_prompt_pool(cfg.paths.prompts), task, o.language, o.with_context);
  if (pool.empty()) throw ConfigError("no prompt templates for " + std::string(to_string(task)) + "/" + variant_name(o));
  ResponseCache cache(o.cache.value_or(llm_dir(cfg) / "cache.jsonl"));
  ChatClient client(ep);
  const auto out = o.out.value_or(llm_dir(cfg) / (o.endpoint + "." + std::string(to_string(task)) + "." +
                                                  variant_name(o) + ".scores.json"));
  const auto save = [&](const SelectionResult& r) {
    write_file(out, [&](std::ostream& s) { s << to_json(r).dump(2) << '\n'; });
  };
  try {
    const auto result = select_best_prompt(pool, dev, ep.model, client.completer(), cache, ep.concurrency);
    save(result);
    std::cout << "best template: " << *result.best_template_id << "\nscores: " << out.string() << '\n';
    return 0;
  } catch (const SelectionIncompleteError& e) {
    save(e.partial());
    std::cerr << "dialex: " << e.what() << " (resume: " << e.resume_token() << ")\n";
    return kExitPartial;
  }
}

int cmd_llm_run(const AppConfig& cfg, const Options& o) {
  const auto& ep = cfg.endpoint(o.endpoint);
  const Task task = task_arg(o.task);
  const WorkLayout work{cfg.paths.work_dir};
  const auto split = parse_split_arg(o.split);
  auto items = gold_items(load_dataset(o.dataset.value_or(work.split_dataset())), split);
  if (task == Task::kTranslate) items = translation_slice(items);
  int id = 0;
  if (o.template_id) {
    id = *o.template_id;
  } else if (o.scores) {
    auto in = open_input(*o.scores);
    const auto sel = selection_from_json(nlohmann::json::parse(in));
    if (!sel.best_template_id) throw ConfigError("score file has no selected template");
    id = *sel.best_template_id;
  } else {
    throw ConfigError("llm-run needs --template-id or --scores");
  }
  const auto pool = load_prompt_pool(cfg.paths.prompts);
  const auto& tmpl = find_template(pool, task, o.language, o.with_context, id);
  ResponseCache cache(o.cache.value_or(llm_dir(cfg) / "cache.jsonl"));
  ChatClient client(ep);
  const auto run = run_task(task, items, tmpl, ep.model, client.completer(), cache, ep.concurrency);
  const auto out = o.out.value_or(llm_dir(cfg) / (o.endpoint + "." + std::string(to_string(task)) + "." +
                                                  tmpl.variant() + "." + std::to_string(id) + ".predictions.jsonl"));
  write_file(out, [&](std::ostream& s) { write_predictions_jsonl(s, run.predictions); });
  std::size_t if_errors = 0;
  for (const auto& p : run.predictions) if_errors += p.if_error() ? 1 : 0;
  std::cout << "predictions: " << run.predictions.size() << " (IF errors " << if_errors << ", cache hits "
            << run.cache_hits << ", requests " << run.network_calls << ")\nwritten: " << out.string() << '\n';
  if (!run.complete()) {
    std::cerr << "dialex: " << run.pending.size() << " item(s) pending after transport errors; first: "
              << run.errors.front() << "\nrerun the same command to resume\n";
    return kExitPartial;
  }
  return 0;
}

int cmd_score(const AppConfig& cfg, const Options& o) {
  const Task task = task_arg(o.score_task);
  if (o.system.has_value() == o.predictions.has_value()) throw ConfigError("give exactly one of --system or --predictions");
  const auto policy = o.if_errors == "count-as-wrong" ? IfErrorPolicy::kCountAsWrong : IfErrorPolicy::kMapToNo;
  if (o.if_errors != "map-to-no" && o.if_errors != "count-as-wrong") {
    throw ConfigError("--if-errors must be map-to-no or count-as-wrong");
  }
  const WorkLayout work{cfg.paths.work_dir};
  const auto split = parse_split_arg(o.split);
  auto items = gold_items(load_dataset(o.dataset.value_or(work.split_dataset())), split);
  if (task == Task::kTranslate) items = translation_slice(items);
  std::vector<Prediction> preds;
  std::string system;
  if (o.system) {
    if (task != Task::kJudge) throw ConfigError("baseline systems only exist for the judgment task");
    auto kind = parse_baseline(*o.system);
    if (!kind) throw ConfigError("unknown system '" + *o.system + "'");
    std::optional<LogRegModel> model;
    if (*kind == BaselineKind::kLogReg) {
      if (o.model) {
        auto in = open_input(*o.model);
        model = logreg_from_json(nlohmann::json::parse(in));
      } else {
        auto all = load_dataset(o.dataset.value_or(work.split_dataset()));
        model = train_logreg(gold_items(all, Split::kDev), cfg.logreg);
      }
    }
    preds = baseline_predictions(*kind, items, cfg.pipeline.seed, model ? &*model : nullptr);
    system = std::string(to_string(*kind));
  } else {
    auto in = open_input(*o.predictions);
    preds = read_predictions_jsonl(in);
    system = preds.empty() ? o.predictions->stem().string() : preds.front().model;
  }
  const auto report = task == Task::kJudge ? score_judgment(system, items, judgment_predictions(preds), policy)
                                           : score_translation(system, items, translation_predictions(preds));
  if (o.out) write_report_files(report, *o.out);
  if (o.format == "json") {
    std::cout << to_json(report).dump(2) << '\n';
  } else {
    write_report_text(std::cout, report);
  }
  return 0;
}

std::vector<Prediction> read_predictions_file(const fs::path& p) {
  auto in = open_input(p);
  return read_predictions_jsonl(in);
}

int cmd_report_delta(const AppConfig& cfg, const Options& o) {
  const Task task = task_arg(o.task);
  const WorkLayout work{cfg.paths.work_dir};
  auto items = gold_items(load_dataset(o.dataset.value_or(work.split_dataset())), parse_split_arg(o.split));
  if (task == Task::kTranslate) items = translation_slice(items);
  const auto pa = read_predictions_file(*o.a);
  const auto pb = read_predictions_file(*o.b);
  const auto name = pa.empty() ? std::string("system") : pa.front().model;
  const auto score = [&](const std::vector<Prediction>& p) {
    return task == Task::kJudge ? score_judgment(name, items, judgment_predictions(p))
                                : score_translation(name, items, translation_predictions(p));
  };
  const std::vector<DeltaRow> rows{delta_report(score(pa), score(pb))};
  if (o.out) write_file(*o.out, [&](std::ostream& s) { write_delta_csv(s, rows); });
  write_delta_csv(std::cout, rows);
  return 0;
}

int cmd_report_histogram(const AppConfig& cfg, const Options& o) {
  const WorkLayout work{cfg.paths.work_dir};
  const auto items = load_dataset(o.dataset.value_or(work.dataset()));
  const auto h = ld_histogram(items);
  if (o.out) write_file(*o.out, [&](std::ostream& s) { write_ld_histogram_csv(s, h); });
  write_ld_histogram_csv(std::cout, h);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dialex: dialect variation dictionaries and LLM evaluation"};
  app.require_subcommand(1);
  Globals g;
  Options o;
  app.add_option("--seed", g.seed, "Global random seed");
  app.add_option("--config", g.config, "INI/TOML-style configuration file")->check(CLI::ExistingFile);
  app.add_option("--work-dir", g.work_dir, "Directory for stage artifacts");
  app.add_option("--threads", g.threads, "Worker threads for matching");

  auto* ingest = app.add_subcommand("ingest", "Validate and normalize the two corpora");
  ingest->add_option("--standard", o.standard, "Tagged standard-language corpus (surface, lemma, upos)");
  ingest->add_option("--dialect", o.dialect, "Raw dialect corpus");
  ingest->add_option("--dialect-format", o.dialect_format, "plain-lines or wiki-extract");

  auto* vocab = app.add_subcommand("vocab", "Build the standard and dialect vocabularies");
  vocab->add_option("--n", o.n, "Number of standard lemmas to keep");
  vocab->add_flag("--fold-case-filter", o.fold_case_filter, "Remove shared tokens case-insensitively");

  auto* match = app.add_subcommand("match", "Find the k nearest dialect terms per lemma");
  match->add_option("--k", o.k, "Neighbors per lemma");
  match->add_option("--contexts", o.contexts, "Usage contexts per term");
  match->add_option("--window", o.window, "Context characters on each side");
  match->add_option("--index", o.index, "length-banded or bk-tree");

  auto* export_tasks = app.add_subcommand("export-tasks", "Turn the candidate table into annotation tasks");

  auto* serve = app.add_subcommand("serve", "Run the annotation API");
  serve->add_option("--host", o.host, "Bind address");
  serve->add_option("--port", o.port, "Port");
  serve->add_option("--tasks", o.tasks, "Task TSV (default: work dir)");
  serve->add_option("--vocab", o.vocab, "Standard vocabulary for task ordering");
  serve->add_option("--log", o.log, "Annotation log (JSONL)");
  serve->add_option("--snapshot", o.snapshot, "Adjudicated snapshot TSV");
  serve->add_option("--snapshot-every", o.snapshot_every, "Writes between snapshots");

  auto* adjudicate_cmd = app.add_subcommand("adjudicate", "Majority-vote gold labels, agreement and dictionary");
  adjudicate_cmd->add_option("--annotations", o.annotations, "Annotation log (default: work dir)");

  auto* split = app.add_subcommand("split", "Assign dev/test splits to gold items");
  split->add_option("--dev-size", o.dev_size, "Number of dev items");

  auto* baselines = app.add_subcommand("baselines", "Train and score the four reference systems");
  baselines->add_option("--learning-rate", o.learning_rate, "Gradient descent step");
  baselines->add_option("--max-iterations", o.max_iterations, "Iteration cap");
  baselines->add_option("--l2", o.l2, "L2 strength");

  const auto llm_common = [&](CLI::App* c) {
    c->add_option("--endpoint", o.endpoint, "Endpoint section name from the config")->required();
    c->add_option("--task", o.task, "judge or translate");
    c->add_option("--language", o.language, "Prompt language");
    c->add_flag("--context", o.with_context, "Use the usage-example prompt variant");
    c->add_option("--dataset", o.dataset, "Split dataset (TSV or JSONL)");
    c->add_option("--cache", o.cache, "Response cache file");
    c->add_option("--out", o.out, "Output file");
  };
  auto* llm_select = app.add_subcommand("llm-select", "Score every pool template on the dev split");
  llm_common(llm_select);
  auto* llm_run = app.add_subcommand("llm-run", "Run one template over a split");
  llm_common(llm_run);
  llm_run->add_option("--template-id", o.template_id, "Template id");
  llm_run->add_option("--scores", o.scores, "Selection score file; uses its best template");
  llm_run->add_option("--split", o.split, "dev, test or all");

  auto* score = app.add_subcommand("score", "Score predictions against gold labels");
  score->add_option("task", o.score_task, "judgment or translation")->required();
  score->add_option("--dataset", o.dataset, "Split dataset (TSV or JSONL)");
  score->add_option("--split", o.split, "dev, test or all");
  score->add_option("--system", o.system, "Baseline: random, ld-threshold, majority, logreg");
  score->add_option("--predictions", o.predictions, "Predictions JSONL");
  score->add_option("--model", o.model, "Logistic regression model JSON");
  score->add_option("--if-errors", o.if_errors, "map-to-no or count-as-wrong");
  score->add_option("--format", o.format, "text or json")->check(CLI::IsMember({"text", "json"}));
  score->add_option("--out", o.out, "Prefix for .report.json/.report.txt/.pos.csv/.ld.csv");

  auto* report = app.add_subcommand("report", "Derived analyses");
  report->require_subcommand(1);
  auto* delta = report->add_subcommand("delta", "Metric and IF-error change from --a to --b");
  delta->add_option("--task", o.task, "judge or translate");
  delta->add_option("--dataset", o.dataset, "Split dataset");
  delta->add_option("--split", o.split, "dev, test or all");
  delta->add_option("--a", o.a, "Baseline predictions")->required();
  delta->add_option("--b", o.b, "Compared predictions")->required();
  delta->add_option("--out", o.out, "CSV output");
  auto* hist = report->add_subcommand("ld-histogram", "Gold labels per Levenshtein distance");
  hist->add_option("--dataset", o.dataset, "Adjudicated dataset");
  hist->add_option("--out", o.out, "CSV output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    const AppConfig cfg = load(g, o);
    const WorkLayout work{cfg.paths.work_dir};
    fs::create_directories(work.dir);
    if (*ingest) {
      const auto s = run_ingest(cfg, work);
      std::cout << "tokens: " << s.tokens << ", standard sentences: " << s.standard_sentences
                << ", dialect sentences: " << s.dialect_sentences << '\n';
    } else if (*vocab) {
      const auto s = run_vocab(cfg, work);
      std::cout << "standard lemmas: " << s.standard << ", dialect terms: " << s.dialect_filtered << " of "
                << s.dialect_all << " after removing shared tokens\n";
    } else if (*match) {
      const auto s = run_match(cfg, work);
      std::cout << "lemmas: " << s.lemmas << ", pairs: " << s.pairs << ", short rows: " << s.truncated_rows << '\n';
    } else if (*export_tasks) {
      std::cout << "tasks: " << run_export_tasks(cfg, work) << '\n';
    } else if (*serve) {
      return cmd_serve(cfg, o);
    } else if (*adjudicate_cmd) {
      const auto s = run_adjudicate(cfg, work, o.annotations);
      std::cout << "records: " << s.records << ", yes: " << s.gold[0] << ", inflected: " << s.gold[1]
                << ", no: " << s.gold[2] << ", unresolved: " << s.unresolved << ", unlabeled: " << s.unlabeled
                << "\nfleiss kappa: "
                << (s.agreement.kappa ? detail::fixed(*s.agreement.kappa, 4) : std::string("undefined")) << " over "
                << s.agreement.items << " items\n";
    } else if (*split) {
      std::cout << "items: " << run_split(cfg, work) << ", dev size: " << cfg.dev_size << '\n';
    } else if (*baselines) {
      for (const auto& r : run_baselines(cfg, work)) {
        std::cout << r.system << ": macro-F1 " << detail::fixed(r.overall) << '\n';
      }
    } else if (*llm_select) {
      return cmd_llm_select(cfg, o);
    } else if (*llm_run) {
      return cmd_llm_run(cfg, o);
    } else if (*score) {
      return cmd_score(cfg, o);
    } else if (*delta) {
      return cmd_report_delta(cfg, o);
    } else if (*hist) {
      return cmd_report_histogram(cfg, o);
    }
    return 0;
  } catch (const DependencyError& e) {
    std::cerr << "dialex: " << e.what() << '\n';
    return kExitDependency;
  } catch (const PartialResultsError& e) {
    std::cerr << "dialex: " << e.what() << '\n';
    return kExitPartial;
  } catch (const ConfigError& e) {
    std::cerr << "dialex: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "dialex: " << e.what() << '\n';
    return kExitError;
  }
}
