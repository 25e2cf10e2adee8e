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

// Human evaluation support: blinded A/B bundles with a separate answer key,
// CSV record import, Cohen's kappa and per-k accuracy and timing summaries.

#ifndef KBLOCK_ANNOTATION_H_
#define KBLOCK_ANNOTATION_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kblock/corpus.h"
#include "kblock/shuffle.h"

namespace kblock {

enum class Side { kA, kB };

char to_char(Side s);
Side parse_side(std::string_view s);

struct AnnotationItem {
  std::string item_id;
  std::size_t k = 1;
  std::vector<std::string> text_a;
  std::vector<std::string> text_b;
  bool operator==(const AnnotationItem&) const = default;
};

// The only file an annotator sees. Nothing in it identifies the source
// document, the seed or the shuffled side.
struct AnnotationBundle {
  std::vector<AnnotationItem> items;
  bool operator==(const AnnotationBundle&) const = default;
};

struct KeyEntry {
  std::string item_id;
  std::string doc_id;
  std::size_t k = 1;
  Side shuffled_side = Side::kA;
  std::uint64_t seed = 0;
  Permutation permutation;
  bool operator==(const KeyEntry&) const = default;
};

struct AnswerKey {
  std::uint64_t presentation_seed = 0;
  std::map<std::string, KeyEntry> entries;  // by item_id
  bool operator==(const AnswerKey&) const = default;
};

struct GeneratedBundle {
  AnnotationBundle bundle;
  AnswerKey key;
};

// Samples per_k_count testable documents without replacement for each k and
// randomizes which side shows the shuffled text. Documents are truncated to
// max_sentences first. Throws ConfigError naming k when too few documents
// are testable.
GeneratedBundle generate_bundle(const Corpus& corpus, const std::vector<std::size_t>& ks,
                                std::size_t per_k_count, std::uint64_t seed,
                                std::size_t max_sentences = 20);

nlohmann::json bundle_to_json(const AnnotationBundle& b);
AnnotationBundle bundle_from_json(const nlohmann::json& j);
nlohmann::json key_to_json(const AnswerKey& k);
AnswerKey key_from_json(const nlohmann::json& j);

struct AnnotationRecord {
  std::string item_id;
  std::string annotator_id;
  Side choice = Side::kA;  // side the annotator marked as shuffled
  double elapsed_seconds = 0.0;
  bool operator==(const AnnotationRecord&) const = default;
};

// Header "item_id,annotator_id,choice,elapsed_seconds"; fields may be quoted.
std::vector<AnnotationRecord> read_records_csv(std::istream& in);
std::vector<AnnotationRecord> read_records_csv(const std::filesystem::path& path);

// Cohen's kappa between two equally long label vectors (position i is the
// same item). Throws on empty or unequal input and Error("degenerate
// marginals") when chance agreement is 1.
double cohen_kappa(const std::vector<std::string>& x, const std::vector<std::string>& y);
// Keyed by item id; the two maps must cover identical item sets.
double cohen_kappa(const std::map<std::string, std::string>& x,
                   const std::map<std::string, std::string>& y);

struct Accuracy {
  std::size_t n = 0;
  std::size_t correct = 0;
  double value() const { return n == 0 ? 0.0 : static_cast<double>(correct) / n; }
};

struct PairKappa {
  std::string annotator_x;
  std::string annotator_y;
  std::size_t n_items = 0;          // co-labeled items
  std::optional<double> kappa;      // unset when degenerate or n_items == 0
  std::map<std::size_t, double> per_k;
};

struct AnnotationSummary {
  std::map<std::string, std::map<std::size_t, Accuracy>> per_annotator;  // annotator -> k
  std::map<std::size_t, Accuracy> per_k;                                 // pooled
  std::vector<PairKappa> pairs;
  std::optional<double> mean_kappa;
  // Mean over pairs of the per-k kappa, and its range across k.
  std::map<std::size_t, double> kappa_per_k;
  std::optional<std::pair<double, double>> kappa_range;
  std::optional<double> mean_seconds_small;  // k in {1, 2}
  std::optional<double> mean_seconds_large;  // k in {3, 4, 5}
  std::optional<double> timing_ratio;        // large / small
};

// Throws Error on a record whose item_id is not in the key and on a repeated
// (item_id, annotator_id) pair.
AnnotationSummary score_annotations(const std::vector<AnnotationRecord>& records,
                                    const AnswerKey& key);

nlohmann::json summary_to_json(const AnnotationSummary& s);
std::string render_summary(const AnnotationSummary& s);

}  // namespace kblock

#endif  // KBLOCK_ANNOTATION_H_
