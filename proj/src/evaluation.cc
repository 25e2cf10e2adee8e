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

#include "kblock/evaluation.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "kblock/error.h"
#include "kblock/rng.h"

namespace kblock {
namespace {

using nlohmann::json;

std::string shortest(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// JSON has no infinities; a zero-probability score is written as a string.
json score_to_json(double v) {
  if (v == -std::numeric_limits<double>::infinity()) return "-inf";
  return v;
}

double score_from_json(const json& j) {
  if (j.is_string() && j.get<std::string>() == "-inf") {
    return -std::numeric_limits<double>::infinity();
  }
  return j.get<double>();
}

std::string request_id(const TestOutcome& o, const char* side) {
  return o.doc_id + "/k" + std::to_string(o.k) + "/s" + std::to_string(o.sample) + "/" + side;
}

TestOutcome run_one(const Document& doc, const Scorer& scorer, std::size_t k,
                    std::size_t sample, std::uint64_t run_seed, bool fail_fast) {
  TestOutcome o;
  o.doc_id = doc.id;
  o.k = k;
  o.sample = sample;
  o.seed = outcome_seed(run_seed, doc.id, k, sample);
  if (num_blocks(doc.size(), k) < 2) {
    o.skipped_reason = kUnshufflable;
    return o;
  }
  ShuffleInstance inst;
  try {
    inst = make_instance(doc, k, o.seed);
  } catch (const Error& e) {
    o.skipped_reason = e.what();
    return o;
  }
  o.permutation = inst.permutation;
  try {
    const ScoreResult a = scorer.score(inst.original, request_id(o, "orig"));
    const ScoreResult b = scorer.score(inst.shuffled, request_id(o, "shuf"));
    o.score_original = a.score;
    o.score_shuffled = b.score;
    o.prediction_correct = decide(a.score, b.score);
  } catch (const std::exception& e) {
    if (fail_fast) throw;
    o.failed_reason = e.what();
    o.score_original.reset();
    o.score_shuffled.reset();
  }
  return o;
}

// Evaluates already truncated documents at one k without judging the result.
KResult run_k(const std::vector<Document>& docs, const Scorer& scorer, std::size_t k,
              std::uint64_t run_seed, const RunOptions& opts) {
  if (k == 0) throw ConfigError("block size must be positive");
  const std::size_t samples = std::max<std::size_t>(opts.samples, 1);
  const std::size_t jobs = docs.size() * samples;
  std::vector<TestOutcome> outcomes(jobs);

  std::size_t workers = opts.workers == 0 ? std::thread::hardware_concurrency() : opts.workers;
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(jobs, 1));

  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr first_error;
  std::mutex error_mu;
  auto work = [&] {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs || stop.load()) return;
      try {
        outcomes[j] = run_one(docs[j / samples], scorer, k, j % samples, run_seed,
                              opts.fail_fast);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        stop.store(true);
        return;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  std::sort(outcomes.begin(), outcomes.end(), [](const TestOutcome& a, const TestOutcome& b) {
    return std::tie(a.doc_id, a.sample) < std::tie(b.doc_id, b.sample);
  });
  KResult out;
  out.summary = summarize(outcomes);
  out.outcomes = std::move(outcomes);
  return out;
}

std::vector<Document> prepare(const Corpus& corpus, std::size_t max_sentences) {
  if (corpus.empty()) throw Error("empty corpus");
  if (max_sentences == 0) throw ConfigError("max_sentences must be positive");
  std::vector<Document> docs;
  docs.reserve(corpus.size());
  for (const auto& d : corpus.documents) docs.push_back(truncate(d, max_sentences));
  return docs;
}

json outcome_to_json(const TestOutcome& o) {
  json j = {{"doc_id", o.doc_id},   {"k", o.k},
            {"sample", o.sample},   {"seed", o.seed},
            {"correct", o.prediction_correct}, {"permutation", o.permutation}};
  if (o.score_original) j["score_original"] = score_to_json(*o.score_original);
  if (o.score_shuffled) j["score_shuffled"] = score_to_json(*o.score_shuffled);
  if (o.skipped_reason) j["skipped_reason"] = *o.skipped_reason;
  if (o.failed_reason) j["failed_reason"] = *o.failed_reason;
  return j;
}

TestOutcome outcome_from_json(const json& j) {
  TestOutcome o;
  o.doc_id = j.at("doc_id").get<std::string>();
  o.k = j.at("k").get<std::size_t>();
  o.sample = j.at("sample").get<std::size_t>();
  o.seed = j.at("seed").get<std::uint64_t>();
  o.prediction_correct = j.at("correct").get<bool>();
  o.permutation = j.at("permutation").get<Permutation>();
  if (j.contains("score_original")) o.score_original = score_from_json(j["score_original"]);
  if (j.contains("score_shuffled")) o.score_shuffled = score_from_json(j["score_shuffled"]);
  if (j.contains("skipped_reason")) o.skipped_reason = j["skipped_reason"].get<std::string>();
  if (j.contains("failed_reason")) o.failed_reason = j["failed_reason"].get<std::string>();
  return o;
}

}  // namespace

std::uint64_t outcome_seed(std::uint64_t run_seed, const std::string& doc_id, std::size_t k,
                           std::size_t sample) {
  return sample == 0 ? derive_seed(run_seed, doc_id, k) : derive_seed(run_seed, doc_id, k, sample);
}

KSummary summarize(const std::vector<TestOutcome>& outcomes) {
  KSummary s;
  for (const auto& o : outcomes) {
    if (o.skipped_reason) {
      ++s.n_skipped;
    } else if (o.failed_reason) {
      ++s.n_failed;
    } else {
      ++s.n_tested;
      if (o.prediction_correct) ++s.n_correct;
    }
  }
  s.accuracy = s.n_tested == 0 ? 0.0
                               : static_cast<double>(s.n_correct) / static_cast<double>(s.n_tested);
  return s;
}

KResult run_shuffle_test(const Corpus& corpus, const Scorer& scorer, std::size_t k,
                         std::uint64_t run_seed, const RunOptions& opts) {
  const auto docs = prepare(corpus, opts.max_sentences);
  KResult r = run_k(docs, scorer, k, run_seed, opts);
  if (r.summary.n_skipped == r.outcomes.size()) throw Error("no testable documents");
  return r;
}

RunReport kbst_sweep(const Corpus& corpus, const Scorer& scorer,
                     const std::vector<std::size_t>& ks, std::uint64_t run_seed,
                     const RunOptions& opts, json config_snapshot) {
  if (ks.empty()) throw ConfigError("no block sizes given");
  for (std::size_t k : ks) {
    if (k == 0) throw ConfigError("block size must be positive");
  }
  const auto docs = prepare(corpus, opts.max_sentences);
  RunReport report;
  report.scorer_name = scorer.name();
  report.corpus_domain = corpus.domain;
  report.run_seed = run_seed;
  report.config_snapshot = std::move(config_snapshot);
  bool any_testable = false;
  for (std::size_t k : ks) {
    if (report.per_k.count(k)) continue;
    KResult r = run_k(docs, scorer, k, run_seed, opts);
    any_testable = any_testable || r.summary.n_skipped < r.outcomes.size();
    if (opts.on_k_done) opts.on_k_done(k, r.summary);
    report.per_k[k] = r.summary;
    report.outcomes[k] = std::move(r.outcomes);
  }
  if (!any_testable) throw Error("no testable documents");
  return report;
}

ReportFormat parse_report_format(const std::string& s) {
  if (s == "json") return ReportFormat::kJson;
  if (s == "tsv") return ReportFormat::kTsv;
  if (s == "table" || s == "text" || s == "text-table") return ReportFormat::kTable;
  throw ConfigError("unknown report format \"" + s + "\" (expected json, tsv or table)");
}

json report_to_json(const RunReport& report) {
  json per_k = json::array();
  for (const auto& [k, s] : report.per_k) {
    json entry = {{"k", k},
                  {"accuracy", s.accuracy},
                  {"n_correct", s.n_correct},
                  {"n_tested", s.n_tested},
                  {"n_skipped", s.n_skipped},
                  {"n_failed", s.n_failed}};
    json outs = json::array();
    if (auto it = report.outcomes.find(k); it != report.outcomes.end()) {
      for (const auto& o : it->second) outs.push_back(outcome_to_json(o));
    }
    entry["outcomes"] = std::move(outs);
    per_k.push_back(std::move(entry));
  }
  return {{"format", "kblock-report"},
          {"version", 1},
          {"scorer", report.scorer_name},
          {"corpus_domain", report.corpus_domain},
          {"run_seed", report.run_seed},
          {"config_snapshot", report.config_snapshot},
          {"per_k", std::move(per_k)}};
}

RunReport report_from_json(const json& j) {
  try {
    if (j.value("format", "") != "kblock-report") throw ConfigError("not a kblock report");
    RunReport r;
    r.scorer_name = j.at("scorer").get<std::string>();
    r.corpus_domain = j.at("corpus_domain").get<std::string>();
    r.run_seed = j.at("run_seed").get<std::uint64_t>();
    r.config_snapshot = j.at("config_snapshot");
    for (const auto& e : j.at("per_k")) {
      const auto k = e.at("k").get<std::size_t>();
      KSummary s;
      s.accuracy = e.at("accuracy").get<double>();
      s.n_correct = e.at("n_correct").get<std::size_t>();
      s.n_tested = e.at("n_tested").get<std::size_t>();
      s.n_skipped = e.at("n_skipped").get<std::size_t>();
      s.n_failed = e.at("n_failed").get<std::size_t>();
      r.per_k[k] = s;
      auto& outs = r.outcomes[k];
      for (const auto& o : e.at("outcomes")) outs.push_back(outcome_from_json(o));
    }
    return r;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed report: ") + e.what());
  }
}

std::string format_accuracy(const KSummary& s) {
  if (s.n_tested == 0) return "-";
  const long long tenths = std::llround(s.accuracy * 1000.0);
  return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
}

std::string render_table(const std::vector<RunReport>& reports) {
  std::set<std::size_t> ks;
  std::vector<std::string> labels;
  std::size_t width = 5;  // "Model"
  for (const auto& r : reports) {
    for (const auto& [k, _] : r.per_k) ks.insert(k);
    labels.push_back(r.scorer_name + " - " + r.corpus_domain);
    width = std::max(width, labels.back().size());
  }
  auto pad_right = [](std::string s, std::size_t w) {
    s.resize(std::max(w, s.size()), ' ');
    return s;
  };
  auto pad_left = [](const std::string& s, std::size_t w) {
    return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
  };
  std::ostringstream out;
  out << pad_right("Model", width);
  for (std::size_t k : ks) out << "  " << pad_left("k=" + std::to_string(k), 6);
  out << '\n';
  for (std::size_t i = 0; i < reports.size(); ++i) {
    out << pad_right(labels[i], width);
    for (std::size_t k : ks) {
      auto it = reports[i].per_k.find(k);
      out << "  " << pad_left(it == reports[i].per_k.end() ? "" : format_accuracy(it->second), 6);
    }
    out << '\n';
  }
  return out.str();
}

std::string emit_report(const RunReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::kJson:
      return report_to_json(report).dump(2) + "\n";
    case ReportFormat::kTsv: {
      std::ostringstream out;
      out << "k\taccuracy\tn_tested\tn_skipped\tn_failed\n";
      for (const auto& [k, s] : report.per_k) {
        out << k << '\t' << shortest(s.accuracy) << '\t' << s.n_tested << '\t' << s.n_skipped
            << '\t' << s.n_failed << '\n';
      }
      return out.str();
    }
    case ReportFormat::kTable:
      return render_table({report});
  }
  return {};
}

}  // namespace kblock
