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

#include "kblock/scoring.h"

#include <cmath>
#include <limits>

#include "kblock/error.h"

namespace kblock {
namespace {

// Neumaier-compensated running sum.
class Accumulator {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void check_term(double lp) {
  if (std::isnan(lp) || lp == std::numeric_limits<double>::infinity()) {
    throw Error("non-finite score");
  }
}

double mean_of(Accumulator acc, std::size_t n) {
  // -inf terms make the compensation NaN; a zero-probability token gives -inf.
  const double v = acc.value();
  if (std::isnan(v)) return -std::numeric_limits<double>::infinity();
  return v / static_cast<double>(n);
}

template <typename ScoreFn>
ScoreResult windowed(std::span<const Token> tokens, const WindowConfig& cfg,
                     ScoreFn&& score_one) {
  if (tokens.empty()) throw Error("empty sequence");
  cfg.validate();
  if (tokens.size() <= cfg.window_tokens) return score_one(tokens);

  ScoreResult out;
  out.token_count = tokens.size();
  std::vector<WindowScore> windows;
  Accumulator acc;
  for (std::size_t begin : window_offsets(tokens.size(), cfg)) {
    const ScoreResult w = score_one(tokens.subspan(begin, cfg.window_tokens));
    windows.push_back({{begin, begin + cfg.window_tokens}, w.score});
    acc.add(w.score);
  }
  out.score = mean_of(acc, windows.size());
  out.per_window = std::move(windows);
  return out;
}

}  // namespace

std::size_t WindowConfig::stride() const {
  return static_cast<std::size_t>(
      std::floor(static_cast<double>(window_tokens) * (1.0 - overlap_fraction)));
}

void WindowConfig::validate() const {
  if (window_tokens < 1) throw ConfigError("window_tokens must be positive");
  if (!(overlap_fraction > 0.0 && overlap_fraction < 1.0)) {
    throw ConfigError("overlap_fraction must lie in (0, 1)");
  }
  if (stride() < 1) throw ConfigError("window stride must be at least one token");
}

ScoreResult generative_score(std::span<const Token> tokens, const ConditionalModel& model) {
  if (tokens.empty()) throw Error("empty sequence");
  Accumulator acc;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const double lp = model.log_prob(tokens.first(i), tokens[i]);
    check_term(lp);
    acc.add(lp);
  }
  ScoreResult out;
  out.token_count = tokens.size();
  out.score = mean_of(acc, tokens.size());
  return out;
}

std::vector<std::size_t> window_offsets(std::size_t n, const WindowConfig& cfg) {
  cfg.validate();
  if (n <= cfg.window_tokens) return {0};
  const std::size_t stride = cfg.stride();
  std::vector<std::size_t> offsets;
  std::size_t start = 0;
  while (start + cfg.window_tokens < n) {
    offsets.push_back(start);
    start += stride;
  }
  const std::size_t tail = n - cfg.window_tokens;
  if (offsets.back() != tail) offsets.push_back(tail);
  return offsets;
}

ScoreResult sliding_window_score(std::span<const Token> tokens,
                                 const ConditionalModel& model, const WindowConfig& cfg) {
  return windowed(tokens, cfg, [&](std::span<const Token> w) {
    return generative_score(w, model);
  });
}

ScoreResult mlm_score(std::span<const Token> tokens, const MaskedModel& mlm) {
  if (tokens.empty()) throw Error("empty sequence");
  Accumulator acc;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const double lp = mlm.masked_log_prob(tokens, i);
    check_term(lp);
    acc.add(lp);
  }
  ScoreResult out;
  out.token_count = tokens.size();
  out.score = mean_of(acc, tokens.size());
  return out;
}

ScoreResult sliding_window_mlm_score(std::span<const Token> tokens, const MaskedModel& mlm,
                                     const WindowConfig& cfg) {
  return windowed(tokens, cfg, [&](std::span<const Token> w) { return mlm_score(w, mlm); });
}

}  // namespace kblock
