// Copyright 2026 The kblock Authors.
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

#include "kblock/cli.h"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "kblock/annotation.h"
#include "kblock/config.h"
#include "kblock/corpus.h"
#include "kblock/error.h"
#include "kblock/evaluation.h"
#include "kblock/external.h"
#include "kblock/ngram.h"
#include "kblock/scorer.h"
#include "kblock/shuffle.h"

namespace kblock {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CorpusFlags {
  std::string path;
  std::string format = "auto";
  bool pre_segmented = false;
  std::string domain;
  std::size_t max_sentences = 20;
};

void add_corpus_flags(CLI::App* cmd, CorpusFlags& f, bool with_truncation = true) {
  cmd->add_option("--corpus", f.path, "Corpus path (JSONL file, text file or directory)")
      ->required();
  cmd->add_option("--format", f.format, "Corpus format")
      ->check(CLI::IsMember({"auto", "jsonl", "text"}));
  cmd->add_flag("--pre-segmented", f.pre_segmented, "Take sentence boundaries from the input");
  if (with_truncation) {
    cmd->add_option("--max-sentences", f.max_sentences, "Truncate documents to this length")
        ->check(CLI::PositiveNumber);
  }
}

IngestResult load_corpus(const std::string& path, const std::string& format, bool pre_segmented,
                         const std::string& domain, std::ostream& err) {
  if (!fs::exists(path)) throw ConfigError("corpus path does not exist: " + path);
  IngestOptions opts;
  opts.pre_segmented = pre_segmented;
  opts.domain = domain.empty() ? fs::path(path).stem().string() : domain;
  if (opts.domain.empty()) opts.domain = "unknown";
  IngestResult r = resolve_format(format, path) == "jsonl" ? ingest_jsonl(path, opts)
                                                           : ingest_text(path, opts);
  for (const auto& issue : r.report.skipped) {
    err << "skipped " << (issue.doc_id.empty() ? "document" : issue.doc_id);
    if (issue.line) err << " (line " << issue.line << ")";
    err << ": " << issue.reason << '\n';
  }
  if (r.corpus.empty()) throw ConfigError("corpus " + path + " holds no documents");
  return r;
}

void write_file(const fs::path& path, const std::string& data) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << data;
  if (!out.flush()) throw Error("cannot write " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::uint64_t seed_or_default(const std::optional<std::uint64_t>& flag) {
  RunConfig cfg;
  cfg.seed = flag;
  return resolve_seed(cfg);
}

std::unique_ptr<Scorer> build_scorer(const RunConfig& cfg, std::ostream& err) {
  if (cfg.scorer == "external") {
    HandleOptions hopts;
    hopts.timeout = std::chrono::milliseconds(static_cast<long long>(cfg.timeout_seconds * 1000));
    const ScoreMode mode = parse_score_mode(cfg.mode);
    if (!cfg.provider_cmd.empty()) return ExternalScorer::spawn(cfg.provider_cmd, mode, hopts);
    return ExternalScorer::connect(cfg.provider_addr, mode, hopts);
  }
  const WindowConfig window{cfg.window_tokens, cfg.overlap_fraction};
  if (!cfg.model.empty()) {
    std::ifstream in(cfg.model);
    if (!in) throw ConfigError("cannot read model " + cfg.model);
    return std::make_unique<NgramScorer>(std::make_shared<NgramModel>(NgramModel::load(in)),
                                         window);
  }
  const IngestResult train =
      load_corpus(cfg.train, cfg.train_format, cfg.pre_segmented, "train", err);
  const auto smoothing = SmoothingConfig::parse(cfg.smoothing, cfg.lambdas);
  return std::make_unique<NgramScorer>(
      std::make_shared<NgramModel>(train_ngram(train.corpus, cfg.order, smoothing)), window);
}

int cmd_evaluate(const std::string& config_path,
                 const std::map<std::string, CLI::Option*>& flags,
                 const std::map<std::string, std::string>& values, bool pre_segmented,
                 bool fail_fast, std::ostream& out, std::ostream& err) {
  RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
  for (const auto& [key, opt] : flags) {
    if (opt->count() == 0) continue;
    if (key == "pre_segmented") {
      cfg.pre_segmented = pre_segmented;
    } else if (key == "fail_fast") {
      cfg.fail_fast = fail_fast;
    } else {
      apply_setting(cfg, key, values.at(key));
    }
  }
  cfg.seed = resolve_seed(cfg);
  validate(cfg);

  const IngestResult corpus =
      load_corpus(cfg.corpus, cfg.corpus_format, cfg.pre_segmented, cfg.domain, err);
  const auto scorer = build_scorer(cfg, err);

  RunOptions opts;
  opts.max_sentences = cfg.max_sentences;
  opts.workers = cfg.workers;
  opts.samples = cfg.samples;
  opts.fail_fast = cfg.fail_fast;
  opts.on_k_done = [&err](std::size_t k, const KSummary& s) {
    err << "k=" << k << ": accuracy " << format_accuracy(s) << "% (tested " << s.n_tested
        << ", skipped " << s.n_skipped << ", failed " << s.n_failed << ")\n";
  };
  const RunReport report =
      kbst_sweep(corpus.corpus, *scorer, cfg.ks, *cfg.seed, opts, config_to_json(cfg));

  const std::string& prefix = cfg.output_prefix;
  const std::string table = emit_report(report, ReportFormat::kTable);
  write_file(prefix + ".report.json", emit_report(report, ReportFormat::kJson));
  write_file(prefix + ".table.txt", table);
  write_file(prefix + ".tsv", emit_report(report, ReportFormat::kTsv));
  out << table;
  return kExitOk;
}

int cmd_shuffle(const CorpusFlags& cf, std::size_t k, std::optional<std::uint64_t> seed_flag,
                const std::string& prefix, std::ostream& out, std::ostream& err) {
  const IngestResult corpus = load_corpus(cf.path, cf.format, cf.pre_segmented, cf.domain, err);
  const std::uint64_t run_seed = seed_or_default(seed_flag);
  std::string lines;
  std::size_t written = 0, skipped = 0;
  for (const auto& raw : corpus.corpus.documents) {
    const Document doc = truncate(raw, cf.max_sentences);
    const std::uint64_t seed = outcome_seed(run_seed, doc.id, k, 0);
    json j;
    if (num_blocks(doc.size(), k) < 2) {
      j = {{"doc_id", doc.id}, {"k", k}, {"seed", seed}, {"skipped", kUnshufflable}};
      ++skipped;
    } else {
      j = to_json(make_instance(doc, k, seed));
      ++written;
    }
    lines += j.dump() + "\n";
  }
  const std::string path = prefix + ".shuffle.jsonl";
  write_file(path, lines);
  out << "wrote " << written << " instances (" << skipped << " skipped) to " << path << '\n';
  return kExitOk;
}

int cmd_annotate_generate(const CorpusFlags& cf, const std::string& ks, std::size_t per_k,
                          std::optional<std::uint64_t> seed_flag, const std::string& prefix,
                          std::ostream& out, std::ostream& err) {
  const IngestResult corpus = load_corpus(cf.path, cf.format, cf.pre_segmented, cf.domain, err);
  const GeneratedBundle g = generate_bundle(corpus.corpus, parse_ks(ks), per_k,
                                            seed_or_default(seed_flag), cf.max_sentences);
  write_file(prefix + ".bundle.json", bundle_to_json(g.bundle).dump(2) + "\n");
  write_file(prefix + ".key.json", key_to_json(g.key).dump(2) + "\n");
  out << "wrote " << g.bundle.items.size() << " items to " << prefix << ".bundle.json (key: "
      << prefix << ".key.json)\n";
  return kExitOk;
}

int cmd_annotate_score(const std::string& key_path, const std::string& records_path,
                       const std::string& prefix, std::ostream& out) {
  const AnswerKey key = key_from_json(read_json(key_path));
  const auto records = read_records_csv(fs::path(records_path));
  const AnnotationSummary s = score_annotations(records, key);
  if (!prefix.empty()) write_file(prefix + ".agreement.json", summary_to_json(s).dump(2) + "\n");
  out << render_summary(s);
  return kExitOk;
}

int cmd_train(const CorpusFlags& cf, int order, const std::string& smoothing,
              const std::string& lambdas, const std::string& prefix, std::ostream& out,
              std::ostream& err) {
  RunConfig tmp;
  apply_setting(tmp, "lambdas", lambdas);
  const auto sm = SmoothingConfig::parse(smoothing, tmp.lambdas);
  const IngestResult corpus = load_corpus(cf.path, cf.format, cf.pre_segmented, "train", err);
  const NgramModel model = train_ngram(corpus.corpus, order, sm);
  std::ostringstream buf;
  model.save(buf);
  const std::string path = prefix + ".ngram";
  write_file(path, buf.str());
  out << "trained order-" << order << " model over " << corpus.corpus.size() << " documents, "
      << model.vocabulary_size() << " types; wrote " << path << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"k-block shuffle test coherence harness", "kblock"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "kblock 0.1.0");

  // evaluate: every config key is also a flag.
  auto* eval = app.add_subcommand("evaluate", "Run a k-block shuffle sweep and write reports");
  std::string config_path;
  eval->add_option("--config", config_path, "key=value config, snapshot JSON or report JSON");
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> flags;
  bool eval_pre_segmented = false;
  bool eval_fail_fast = false;
  for (const auto& key : config_keys()) {
    std::string flag = "--" + key;
    for (char& c : flag) {
      if (c == '_') c = '-';
    }
    if (key == "corpus_format") flag += ",--format";
    if (key == "output_prefix") flag += ",--out";
    if (key == "pre_segmented") {
      flags[key] = eval->add_flag(flag, eval_pre_segmented, "Take sentence boundaries from input");
    } else if (key == "fail_fast") {
      flags[key] = eval->add_flag(flag, eval_fail_fast, "Stop at the first scorer error");
    } else {
      flags[key] = eval->add_option(flag, values[key], "Config key " + key);
    }
  }

  auto* shuf = app.add_subcommand("shuffle", "Write shuffle instances for inspection");
  CorpusFlags shuf_corpus;
  std::size_t shuf_k = 1;
  std::optional<std::uint64_t> shuf_seed;
  std::string shuf_prefix = "kblock";
  add_corpus_flags(shuf, shuf_corpus);
  shuf->add_option("--k", shuf_k, "Block size")->required()->check(CLI::PositiveNumber);
  shuf->add_option("--seed", shuf_seed, "Run seed (default: $KBLOCK_SEED, then 42)");
  shuf->add_option("--output-prefix,--out", shuf_prefix, "Writes <prefix>.shuffle.jsonl");

  auto* annotate = app.add_subcommand("annotate", "Human annotation bundles and agreement");
  annotate->require_subcommand(1);
  auto* gen = annotate->add_subcommand("generate", "Write a blinded bundle and its answer key");
  CorpusFlags gen_corpus;
  std::string gen_ks = "1,2,3,4,5";
  std::size_t gen_per_k = 0;
  std::optional<std::uint64_t> gen_seed;
  std::string gen_prefix = "kblock";
  add_corpus_flags(gen, gen_corpus);
  gen->add_option("--ks", gen_ks, "Block sizes");
  gen->add_option("--per-k", gen_per_k, "Items per block size")
      ->required()
      ->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "Presentation seed (default: $KBLOCK_SEED, then 42)");
  gen->add_option("--output-prefix,--out", gen_prefix,
                  "Writes <prefix>.bundle.json and <prefix>.key.json");

  auto* score = annotate->add_subcommand("score", "Accuracy, kappa and timing from records");
  std::string key_path, records_path, score_prefix;
  score->add_option("--key", key_path, "Answer key JSON")->required();
  score->add_option("--records", records_path,
                    "CSV with item_id,annotator_id,choice,elapsed_seconds")
      ->required();
  score->add_option("--output-prefix,--out", score_prefix, "Also write <prefix>.agreement.json");

  auto* train = app.add_subcommand("train-ngram", "Train and save the built-in n-gram model");
  CorpusFlags train_corpus;
  int train_order = 3;
  std::string train_smoothing = "witten_bell";
  std::string train_lambdas;
  std::string train_prefix = "kblock";
  train->add_option("--train,--corpus", train_corpus.path, "Training corpus")->required();
  train->add_option("--format", train_corpus.format, "Corpus format")
      ->check(CLI::IsMember({"auto", "jsonl", "text"}));
  train->add_flag("--pre-segmented", train_corpus.pre_segmented,
                  "Take sentence boundaries from the input");
  train->add_option("--order", train_order, "n-gram order");
  train->add_option("--smoothing", train_smoothing, "witten_bell | fixed");
  train->add_option("--lambdas", train_lambdas, "Fixed weights, one per order");
  train->add_option("--output-prefix,--out", train_prefix, "Writes <prefix>.ngram");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (eval->parsed()) {
      return cmd_evaluate(config_path, flags, values, eval_pre_segmented, eval_fail_fast, out,
                          err);
    }
    if (shuf->parsed()) return cmd_shuffle(shuf_corpus, shuf_k, shuf_seed, shuf_prefix, out, err);
    if (gen->parsed()) {
      return cmd_annotate_generate(gen_corpus, gen_ks, gen_per_k, gen_seed, gen_prefix, out, err);
    }
    if (score->parsed()) return cmd_annotate_score(key_path, records_path, score_prefix, out);
    if (train->parsed()) {
      return cmd_train(train_corpus, train_order, train_smoothing, train_lambdas, train_prefix,
                       out, err);
    }
  } catch (const ConfigError& e) {
    err << "kblock: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "kblock: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv = {"kblock"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace kblock
