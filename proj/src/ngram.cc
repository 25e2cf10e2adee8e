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

#include "kblock/ngram.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>

#include "kblock/error.h"

namespace kblock {
namespace {

constexpr std::string_view kMagic = "kblock-ngram 1";

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

[[noreturn]] void bad_model(const std::string& why) {
  throw ConfigError("malformed n-gram model file: " + why);
}

}  // namespace

SmoothingConfig SmoothingConfig::parse(std::string_view method, std::vector<double> lambdas) {
  if (method == "witten_bell" || method == "wb") {
    if (!lambdas.empty()) throw ConfigError("witten_bell smoothing takes no lambdas");
    return witten_bell();
  }
  if (method == "fixed") return fixed(std::move(lambdas));
  throw ConfigError("unknown smoothing \"" + std::string(method) +
                    "\" (expected witten_bell or fixed)");
}

std::string SmoothingConfig::method_name() const {
  return method == Method::kWittenBell ? "witten_bell" : "fixed";
}

std::vector<Token> ngram_stream(const Document& doc) {
  std::vector<Token> out;
  for (const auto& s : doc.sentences) {
    out.insert(out.end(), s.tokens.begin(), s.tokens.end());
    out.emplace_back(kEos);
  }
  return out;
}

std::size_t NgramModel::VecHash::operator()(const std::vector<TokenId>& v) const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (TokenId id : v) {
    h ^= id;
    h *= 0x100000001b3ULL;
  }
  return static_cast<std::size_t>(h);
}

NgramModel::NgramModel(int order, SmoothingConfig smoothing)
    : order_(order), smoothing_(std::move(smoothing)), tables_(static_cast<std::size_t>(order)) {
  bos_ = intern(Token(kBos));
  unk_ = intern(Token(kUnk));
}

void NgramModel::validate_smoothing() const {
  if (smoothing_.method != SmoothingConfig::Method::kFixed) return;
  if (smoothing_.lambdas.size() != static_cast<std::size_t>(order_)) {
    throw ConfigError("fixed smoothing needs one lambda per context length (" +
                      std::to_string(order_) + ")");
  }
  for (double l : smoothing_.lambdas) {
    if (!(l >= 0.0 && l < 1.0)) throw ConfigError("fixed lambdas must lie in [0, 1)");
  }
}

NgramModel::TokenId NgramModel::intern(const Token& t) {
  auto [it, inserted] = token_to_id_.try_emplace(t, static_cast<TokenId>(id_to_token_.size()));
  if (inserted) id_to_token_.push_back(t);
  return it->second;
}

NgramModel::TokenId NgramModel::lookup(std::string_view t) const {
  auto it = token_to_id_.find(Token(t));
  if (it == token_to_id_.end() || it->second == bos_) return unk_;
  return it->second;
}

const NgramModel::ContextStats* NgramModel::find(std::size_t n,
                                                 std::span<const TokenId> history) const {
  std::vector<TokenId> key(history.end() - static_cast<std::ptrdiff_t>(n), history.end());
  const auto& table = tables_[n];
  auto it = table.find(key);
  return it == table.end() ? nullptr : &it->second;
}

void NgramModel::add(std::span<const TokenId> padded, std::size_t pos) {
  for (std::size_t n = 0; n < static_cast<std::size_t>(order_); ++n) {
    std::vector<TokenId> key(padded.begin() + static_cast<std::ptrdiff_t>(pos - n),
                             padded.begin() + static_cast<std::ptrdiff_t>(pos));
    ContextStats& stats = tables_[n][std::move(key)];
    ++stats.total;
    ++stats.next[padded[pos]];
  }
}

double NgramModel::prob_ids(std::span<const TokenId> history, TokenId next) const {
  double p = 1.0 / static_cast<double>(vocab_size_);
  for (std::size_t n = 0; n < static_cast<std::size_t>(order_); ++n) {
    const ContextStats* stats = find(n, history);
    if (stats == nullptr) break;  // longer histories are unseen too
    double lambda;
    if (smoothing_.method == SmoothingConfig::Method::kWittenBell) {
      lambda = static_cast<double>(stats->total) /
               static_cast<double>(stats->total + stats->next.size());
    } else {
      lambda = smoothing_.lambdas[n];
    }
    auto it = stats->next.find(next);
    const double c = it == stats->next.end() ? 0.0 : static_cast<double>(it->second);
    p = lambda * c / static_cast<double>(stats->total) + (1.0 - lambda) * p;
  }
  return p;
}

double NgramModel::prob(std::span<const Token> context, const Token& next) const {
  const std::size_t h = static_cast<std::size_t>(order_ - 1);
  std::vector<TokenId> history(h, bos_);
  const std::size_t take = std::min(h, context.size());
  for (std::size_t i = 0; i < take; ++i) {
    history[h - take + i] = lookup(context[context.size() - take + i]);
  }
  return prob_ids(history, lookup(next));
}

double NgramModel::log_prob(std::span<const Token> prefix, const Token& next) const {
  return std::log(prob(prefix, next));
}

std::vector<Token> NgramModel::vocabulary() const {
  std::vector<Token> out;
  for (TokenId id = 0; id < id_to_token_.size(); ++id) {
    if (id != bos_) out.push_back(id_to_token_[id]);
  }
  return out;
}

std::uint64_t NgramModel::count(std::span<const Token> context, const Token& next) const {
  if (context.size() >= static_cast<std::size_t>(order_)) return 0;
  std::vector<TokenId> key;
  for (const auto& t : context) {
    auto it = token_to_id_.find(t);
    if (it == token_to_id_.end()) return 0;
    key.push_back(it->second);
  }
  auto ctx = tables_[key.size()].find(key);
  if (ctx == tables_[key.size()].end()) return 0;
  auto nt = token_to_id_.find(next);
  if (nt == token_to_id_.end()) return 0;
  auto it = ctx->second.next.find(nt->second);
  return it == ctx->second.next.end() ? 0 : it->second;
}

std::uint64_t NgramModel::context_count(std::span<const Token> context) const {
  if (context.size() >= static_cast<std::size_t>(order_)) return 0;
  std::vector<TokenId> key;
  for (const auto& t : context) {
    auto it = token_to_id_.find(t);
    if (it == token_to_id_.end()) return 0;
    key.push_back(it->second);
  }
  auto ctx = tables_[key.size()].find(key);
  return ctx == tables_[key.size()].end() ? 0 : ctx->second.total;
}

void NgramModel::save(std::ostream& out) const {
  out << kMagic << '\n';
  out << "order " << order_ << '\n';
  out << "smoothing " << smoothing_.method_name();
  for (double l : smoothing_.lambdas) out << ' ' << format_double(l);
  out << '\n';
  out << "vocab " << vocab_size_ << '\n';
  for (TokenId id = 0; id < id_to_token_.size(); ++id) {
    if (id != bos_) out << id_to_token_[id] << '\n';
  }

  struct Row {
    std::size_t n;
    const std::vector<TokenId>* history;
    TokenId next;
    std::uint64_t count;
  };
  std::vector<Row> rows;
  for (std::size_t n = 0; n < tables_.size(); ++n) {
    for (const auto& [history, stats] : tables_[n]) {
      for (const auto& [next, c] : stats.next) rows.push_back({n, &history, next, c});
    }
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.n, *a.history, a.next) < std::tie(b.n, *b.history, b.next);
  });
  out << "counts " << rows.size() << '\n';
  for (const Row& r : rows) {
    out << r.n << '\t';
    for (std::size_t i = 0; i < r.history->size(); ++i) {
      if (i) out << ' ';
      out << id_to_token_[(*r.history)[i]];
    }
    out << '\t' << id_to_token_[r.next] << '\t' << r.count << '\n';
  }
}

NgramModel NgramModel::load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMagic) bad_model("bad header");

  auto expect = [&](std::string_view key) {
    if (!std::getline(in, line) || !line.starts_with(std::string(key) + " ")) {
      bad_model("expected \"" + std::string(key) + "\"");
    }
    return line.substr(key.size() + 1);
  };
  int order = 0;
  try {
    order = std::stoi(expect("order"));
  } catch (const std::logic_error&) {
    bad_model("bad order");
  }
  if (order < 1) bad_model("order must be >= 1");

  const auto smooth_fields = split(expect("smoothing"), ' ');
  std::vector<double> lambdas;
  try {
    for (std::size_t i = 1; i < smooth_fields.size(); ++i) lambdas.push_back(std::stod(smooth_fields[i]));
  } catch (const std::logic_error&) {
    bad_model("bad lambda");
  }
  NgramModel model(order, SmoothingConfig::parse(smooth_fields[0], std::move(lambdas)));
  model.validate_smoothing();

  std::size_t vocab = 0;
  std::size_t rows = 0;
  try {
    vocab = std::stoull(expect("vocab"));
  } catch (const std::logic_error&) {
    bad_model("bad vocab size");
  }
  for (std::size_t i = 0; i < vocab; ++i) {
    if (!std::getline(in, line)) bad_model("truncated vocabulary");
    model.intern(line);
  }
  if (model.id_to_token_.size() != vocab + 1) bad_model("duplicate vocabulary entry");
  model.vocab_size_ = vocab;
  try {
    rows = std::stoull(expect("counts"));
  } catch (const std::logic_error&) {
    bad_model("bad count total");
  }

  auto id_of = [&](const std::string& t) {
    auto it = model.token_to_id_.find(t);
    if (it == model.token_to_id_.end()) bad_model("unknown token \"" + t + "\"");
    return it->second;
  };
  for (std::size_t r = 0; r < rows; ++r) {
    if (!std::getline(in, line)) bad_model("truncated counts");
    const auto fields = split(line, '\t');
    if (fields.size() != 4) bad_model("bad count row");
    std::size_t n = 0;
    std::uint64_t c = 0;
    try {
      n = std::stoull(fields[0]);
      c = std::stoull(fields[3]);
    } catch (const std::logic_error&) {
      bad_model("bad count row");
    }
    if (n >= static_cast<std::size_t>(order)) bad_model("history longer than order");
    std::vector<TokenId> history;
    if (!fields[1].empty()) {
      for (const auto& t : split(fields[1], ' ')) history.push_back(id_of(t));
    }
    if (history.size() != n) bad_model("history length mismatch");
    ContextStats& stats = model.tables_[n][std::move(history)];
    stats.total += c;
    stats.next[id_of(fields[2])] += c;
  }
  return model;
}

NgramModel train_ngram(const Corpus& corpus, int order, const SmoothingConfig& smoothing) {
  if (order < 1) throw Error("n-gram order must be >= 1");
  if (corpus.empty()) throw Error("empty training corpus");
  NgramModel model(order, smoothing);
  model.validate_smoothing();

  const std::size_t pad = static_cast<std::size_t>(order - 1);
  std::vector<NgramModel::TokenId> padded;
  for (const auto& doc : corpus.documents) {
    padded.assign(pad, model.bos_);
    for (const auto& t : ngram_stream(doc)) padded.push_back(model.intern(t));
    for (std::size_t pos = pad; pos < padded.size(); ++pos) model.add(padded, pos);
  }
  model.vocab_size_ = model.id_to_token_.size() - 1;
  return model;
}

}  // namespace kblock
