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

// Run configuration for the command-line tool.
//
// File format: one "key = value" per line, '#' starts a comment, blank lines
// ignored, unknown keys rejected. Lists are comma separated. The same keys
// (with '-' in place of '_') are accepted as command-line flags, and flags
// win over the file. A JSON object is also accepted: either a configuration
// snapshot or a whole report, whose "config_snapshot" is used.
//
//   corpus            corpus path (JSONL file, text file or directory)
//   corpus_format     auto | jsonl | text            (auto: by extension)
//   pre_segmented     true | false
//   domain            corpus domain label            (default: corpus stem)
//   scorer            ngram | external
//   order             n-gram order                   (default 3)
//   smoothing         witten_bell | fixed
//   lambdas           fixed weights, one per order
//   train             training corpus for the n-gram scorer
//   train_format      auto | jsonl | text
//   model             saved n-gram model, instead of train
//   provider_cmd      external provider command, run with /bin/sh -c
//   provider_addr     external provider host:port
//   mode              generative | mlm
//   timeout_seconds   per-request provider timeout   (default 120)
//   ks                block sizes                    (default 1,2,3,4,5)
//   seed              run seed      (fallback: KBLOCK_SEED, then 42)
//   max_sentences     truncation length              (default 20)
//   window_tokens     sliding window size            (default 512)
//   overlap_fraction  window overlap                 (default 0.5)
//   workers           worker threads, 0 = one per processor
//   samples           shuffled counterparts per document (default 1)
//   fail_fast         abort on the first scorer error
//   output_prefix     report path prefix             (default "kblock")

#ifndef KBLOCK_CONFIG_H_
#define KBLOCK_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace kblock {

inline constexpr std::uint64_t kDefaultRunSeed = 42;

struct RunConfig {
  std::string corpus;
  std::string corpus_format = "auto";
  bool pre_segmented = false;
  std::string domain;
  std::string scorer = "ngram";
  int order = 3;
  std::string smoothing = "witten_bell";
  std::vector<double> lambdas;
  std::string train;
  std::string train_format = "auto";
  std::string model;
  std::string provider_cmd;
  std::string provider_addr;
  std::string mode = "generative";
  double timeout_seconds = 120.0;
  std::vector<std::size_t> ks = {1, 2, 3, 4, 5};
  std::optional<std::uint64_t> seed;
  std::size_t max_sentences = 20;
  std::size_t window_tokens = 512;
  double overlap_fraction = 0.5;
  std::size_t workers = 0;
  std::size_t samples = 1;
  bool fail_fast = false;
  std::string output_prefix = "kblock";

  bool operator==(const RunConfig&) const = default;
};

const std::vector<std::string>& config_keys();

// Sets one key from its textual value. Throws ConfigError on unknown keys
// and unparsable values.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

RunConfig parse_config_text(std::string_view text, const std::string& origin = "config");
// key=value file, snapshot JSON or report JSON.
RunConfig load_config(const std::filesystem::path& path);

nlohmann::json config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const nlohmann::json& j);

// Explicit seed, else $KBLOCK_SEED, else kDefaultRunSeed.
std::uint64_t resolve_seed(const RunConfig& cfg);

// "jsonl" or "text" for a path under an "auto" format.
std::string resolve_format(const std::string& format, const std::string& path);

// Checks value ranges, required keys and that input paths exist. Throws
// ConfigError naming the offending key or path.
void validate(const RunConfig& cfg);

std::vector<std::size_t> parse_ks(std::string_view s);

}  // namespace kblock

#endif  // KBLOCK_CONFIG_H_
