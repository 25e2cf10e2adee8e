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

// Likelihood-based sequence scores. Every score is a per-token mean log
// probability (natural log), so higher means "more likely under the model".
//
//   generative:  (1/N) * sum_i log P(w_i | w_1 .. w_{i-1})
//   masked:      (1/N) * sum_i log P(w_i | all tokens except position i)
//
// Sequences longer than a window are scored in overlapping windows; each
// window is scored as a fresh sequence and the document score is the
// unweighted mean of the per-window scores.

#ifndef KBLOCK_SCORING_H_
#define KBLOCK_SCORING_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kblock/corpus.h"

namespace kblock {

struct WindowSpan {
  std::size_t begin = 0;  // token offset, inclusive
  std::size_t end = 0;    // exclusive

  bool operator==(const WindowSpan&) const = default;
};

struct WindowScore {
  WindowSpan span;
  double score = 0.0;

  bool operator==(const WindowScore&) const = default;
};

struct ScoreResult {
  std::string doc_id;
  double score = 0.0;
  std::size_t token_count = 0;
  std::optional<std::vector<WindowScore>> per_window;
};

struct WindowConfig {
  std::size_t window_tokens = 512;
  double overlap_fraction = 0.5;

  // floor(window_tokens * (1 - overlap_fraction)).
  std::size_t stride() const;
  // Throws ConfigError unless window_tokens >= 1, overlap in (0, 1) and
  // stride >= 1.
  void validate() const;
};

// Left-to-right conditional model: log P(next | prefix). The prefix is the
// whole sequence so far; models decide how much of it they look at.
class ConditionalModel {
 public:
  virtual ~ConditionalModel() = default;
  virtual double log_prob(std::span<const Token> prefix, const Token& next) const = 0;
};

// Masked conditional model: log P(tokens[position] | every other token).
class MaskedModel {
 public:
  virtual ~MaskedModel() = default;
  virtual double masked_log_prob(std::span<const Token> tokens,
                                 std::size_t position) const = 0;
};

// Throws Error("empty sequence") on empty input and Error("non-finite score")
// if the model yields NaN or +inf. A zero probability gives -inf.
ScoreResult generative_score(std::span<const Token> tokens, const ConditionalModel& model);

// Window start offsets for a sequence of n tokens: 0, stride, 2*stride, ...
// while the window does not reach the end, then one window right-aligned to
// the tail. A single offset 0 when n <= window_tokens.
std::vector<std::size_t> window_offsets(std::size_t n, const WindowConfig& cfg);

ScoreResult sliding_window_score(std::span<const Token> tokens,
                                 const ConditionalModel& model, const WindowConfig& cfg);

// One provider call per position.
ScoreResult mlm_score(std::span<const Token> tokens, const MaskedModel& mlm);

ScoreResult sliding_window_mlm_score(std::span<const Token> tokens, const MaskedModel& mlm,
                                     const WindowConfig& cfg);

}  // namespace kblock

#endif  // KBLOCK_SCORING_H_
