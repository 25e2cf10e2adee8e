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

// Interpolated n-gram language model with a uniform floor.
//
// Training stream per document: (order - 1) copies of <s> as context, then
// every sentence's tokens each followed by </s>. <s> is never predicted.
// The vocabulary V is every predicted training token plus <unk>; unseen
// tokens are mapped to <unk>.
//
// Probabilities are built bottom-up over context lengths n = 0 .. order-1:
//
//   P_floor(w)   = 1 / |V|
//   P_n(w | h_n) = lambda(h_n) * c(h_n, w) / c(h_n) + (1 - lambda(h_n)) * P_{n-1}(w | h_{n-1})
//
// where h_n is the last n tokens of the context (left-padded with <s>),
// P_{-1} is the floor, and a context never seen in training is skipped
// (P_n = P_{n-1}). lambda is either Witten-Bell, c(h) / (c(h) + T(h)) with
// T(h) the number of distinct continuations of h, or a fixed weight per
// context length. Each level mixes a proper distribution with the level
// below, so every conditional sums to one over V and every token keeps
// probability >= prod(1 - lambda) / |V| > 0.

#ifndef KBLOCK_NGRAM_H_
#define KBLOCK_NGRAM_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kblock/corpus.h"
#include "kblock/scoring.h"

namespace kblock {

inline constexpr std::string_view kBos = "<s>";
inline constexpr std::string_view kEos = "</s>";
inline constexpr std::string_view kUnk = "<unk>";

struct SmoothingConfig {
  enum class Method { kWittenBell, kFixed };
  Method method = Method::kWittenBell;
  // kFixed only: one weight per context length 0 .. order-1, each in [0, 1).
  std::vector<double> lambdas;

  static SmoothingConfig witten_bell() { return {}; }
  static SmoothingConfig fixed(std::vector<double> lambdas) {
    return {Method::kFixed, std::move(lambdas)};
  }
  static SmoothingConfig parse(std::string_view method, std::vector<double> lambdas = {});
  std::string method_name() const;
};

// Sentence tokens of doc, each sentence followed by </s>.
std::vector<Token> ngram_stream(const Document& doc);

class NgramModel : public ConditionalModel {
 public:
  using TokenId = std::uint32_t;

  int order() const { return order_; }
  const SmoothingConfig& smoothing() const { return smoothing_; }

  // Predictable vocabulary (includes </s> and <unk>, excludes <s>).
  std::size_t vocabulary_size() const { return vocab_size_; }
  std::vector<Token> vocabulary() const;

  double prob(std::span<const Token> context, const Token& next) const;
  double log_prob(std::span<const Token> prefix, const Token& next) const override;

  // Raw training counts. context is the exact n-token history (n < order).
  std::uint64_t count(std::span<const Token> context, const Token& next) const;
  std::uint64_t context_count(std::span<const Token> context) const;

  // Line-oriented text format; save(load(x)) reproduces x byte for byte.
  void save(std::ostream& out) const;
  static NgramModel load(std::istream& in);

 private:
  friend NgramModel train_ngram(const Corpus&, int, const SmoothingConfig&);

  struct VecHash {
    std::size_t operator()(const std::vector<TokenId>& v) const;
  };
  struct ContextStats {
    std::uint64_t total = 0;
    std::unordered_map<TokenId, std::uint64_t> next;
  };
  using Table = std::unordered_map<std::vector<TokenId>, ContextStats, VecHash>;

  NgramModel(int order, SmoothingConfig smoothing);
  TokenId intern(const Token& t);
  TokenId lookup(std::string_view t) const;
  const ContextStats* find(std::size_t n, std::span<const TokenId> history) const;
  void add(std::span<const TokenId> padded, std::size_t pos);
  double prob_ids(std::span<const TokenId> history, TokenId next) const;
  void validate_smoothing() const;

  int order_;
  SmoothingConfig smoothing_;
  std::vector<Token> id_to_token_;
  std::unordered_map<Token, TokenId> token_to_id_;
  TokenId bos_ = 0;
  TokenId unk_ = 0;
  std::size_t vocab_size_ = 0;
  std::vector<Table> tables_;  // tables_[n]: histories of length n
};

NgramModel train_ngram(const Corpus& corpus, int order = 3,
                       const SmoothingConfig& smoothing = {});

}  // namespace kblock

#endif  // KBLOCK_NGRAM_H_
