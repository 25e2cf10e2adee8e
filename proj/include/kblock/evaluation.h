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

// Shuffle-test runner, k-block sweeps and report serialization.
//
// For each document the runner truncates, builds a ShuffleInstance with a
// per-document seed, scores both sides with the same scorer and predicts the
// lower-scoring side as shuffled. A prediction is correct only when the
// original scores strictly higher; ties are wrong.

#ifndef KBLOCK_EVALUATION_H_
#define KBLOCK_EVALUATION_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kblock/corpus.h"
#include "kblock/scorer.h"
#include "kblock/shuffle.h"

namespace kblock {

inline bool decide(double score_original, double score_shuffled) {
  return score_original > score_shuffled;
}

struct TestOutcome {
  std::string doc_id;
  std::size_t k = 1;
  std::size_t sample = 0;
  std::uint64_t seed = 0;
  std::optional<double> score_original;
  std::optional<double> score_shuffled;
  bool prediction_correct = false;
  std::optional<std::string> skipped_reason;
  std::optional<std::string> failed_reason;
  Permutation permutation;

  bool tested() const { return !skipped_reason && !failed_reason; }
  bool operator==(const TestOutcome&) const = default;
};

struct KSummary {
  double accuracy = 0.0;  // n_correct / n_tested, 0 when nothing was tested
  std::size_t n_correct = 0;
  std::size_t n_tested = 0;
  std::size_t n_skipped = 0;
  std::size_t n_failed = 0;
  bool operator==(const KSummary&) const = default;
};

struct KResult {
  KSummary summary;
  std::vector<TestOutcome> outcomes;  // sorted by (doc_id, sample)
};

struct RunReport {
  std::string scorer_name;
  std::string corpus_domain;
  std::uint64_t run_seed = 0;
  nlohmann::json config_snapshot = nlohmann::json::object();
  std::map<std::size_t, KSummary> per_k;
  std::map<std::size_t, std::vector<TestOutcome>> outcomes;
  bool operator==(const RunReport&) const = default;
};

struct RunOptions {
  std::size_t max_sentences = 20;
  std::size_t workers = 1;
  // Shuffled counterparts per document; sample 0 uses derive_seed(run_seed,
  // doc_id, k), sample s > 0 salts the same hash with s.
  std::size_t samples = 1;
  // Rethrow the first scorer error instead of recording a failed outcome.
  bool fail_fast = false;
  // Called after each completed k in a sweep.
  std::function<void(std::size_t k, const KSummary&)> on_k_done;
};

std::uint64_t outcome_seed(std::uint64_t run_seed, const std::string& doc_id, std::size_t k,
                           std::size_t sample);

// Tallies outcomes; accuracy is over tested outcomes only.
KSummary summarize(const std::vector<TestOutcome>& outcomes);

// Throws Error("empty corpus"), or Error("no testable documents") when every
// document is skipped.
KResult run_shuffle_test(const Corpus& corpus, const Scorer& scorer, std::size_t k,
                         std::uint64_t run_seed, const RunOptions& opts = {});

// Runs every k. A k at which all documents are skipped is kept with
// n_tested = 0; the sweep throws "no testable documents" only if that holds
// for every k.
RunReport kbst_sweep(const Corpus& corpus, const Scorer& scorer,
                     const std::vector<std::size_t>& ks, std::uint64_t run_seed,
                     const RunOptions& opts = {},
                     nlohmann::json config_snapshot = nlohmann::json::object());

enum class ReportFormat { kJson, kTsv, kTable };

ReportFormat parse_report_format(const std::string& s);

// Deterministic serialization. kJson carries every outcome.
std::string emit_report(const RunReport& report, ReportFormat format);

nlohmann::json report_to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& j);

// Accuracy as a percentage with one decimal ("94.5"), "-" when nothing was
// tested.
std::string format_accuracy(const KSummary& s);

// Models x block-size grid over several reports, one row per report.
std::string render_table(const std::vector<RunReport>& reports);

}  // namespace kblock

#endif  // KBLOCK_EVALUATION_H_
