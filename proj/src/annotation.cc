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

#include "kblock/annotation.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "kblock/error.h"
#include "kblock/rng.h"

namespace kblock {
namespace {

using nlohmann::json;

constexpr std::uint64_t kSideSalt = 0x53494445;  // "SIDE"

std::vector<std::string> texts(const Document& d) {
  std::vector<std::string> out;
  for (const auto& s : d.sentences) out.push_back(s.text);
  return out;
}

std::string item_name(std::size_t index) {
  std::string n = std::to_string(index);
  if (n.size() < 4) n.insert(0, 4 - n.size(), '0');
  return "item-" + n;
}

// Splits one CSV row; supports double-quoted fields with "" escapes.
std::vector<std::string> csv_fields(const std::string& line, std::size_t lineno) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw ConfigError("records line " + std::to_string(lineno) + ": unterminated quote");
  out.push_back(std::move(cur));
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<double> kappa_or_none(const std::vector<std::string>& x,
                                    const std::vector<std::string>& y) {
  try {
    return cohen_kappa(x, y);
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::optional<double> mean(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

char to_char(Side s) { return s == Side::kA ? 'A' : 'B'; }

Side parse_side(std::string_view s) {
  if (s == "A" || s == "a") return Side::kA;
  if (s == "B" || s == "b") return Side::kB;
  throw ConfigError("choice must be A or B, got \"" + std::string(s) + "\"");
}

GeneratedBundle generate_bundle(const Corpus& corpus, const std::vector<std::size_t>& ks,
                                std::size_t per_k_count, std::uint64_t seed,
                                std::size_t max_sentences) {
  if (ks.empty()) throw ConfigError("no block sizes given");
  if (per_k_count == 0) throw ConfigError("per-k count must be positive");
  std::vector<Document> docs;
  for (const auto& d : corpus.documents) docs.push_back(truncate(d, max_sentences));

  GeneratedBundle out;
  out.key.presentation_seed = seed;
  std::set<std::size_t> seen_k;
  for (std::size_t k : ks) {
    if (k == 0) throw ConfigError("block size must be positive");
    if (!seen_k.insert(k).second) throw ConfigError("duplicate block size k=" + std::to_string(k));
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      if (num_blocks(docs[i].size(), k) >= 2) candidates.push_back(i);
    }
    if (candidates.size() < per_k_count) {
      throw ConfigError("insufficient testable documents for k=" + std::to_string(k) + ": need " +
                        std::to_string(per_k_count) + ", have " +
                        std::to_string(candidates.size()));
    }
    // Partial Fisher-Yates: the first per_k_count slots are the sample.
    Xoshiro256 rng(derive_seed(seed, "annotation-sample", k));
    for (std::size_t i = 0; i < per_k_count; ++i) {
      const std::size_t j = i + rng.below(candidates.size() - i);
      std::swap(candidates[i], candidates[j]);
    }
    for (std::size_t i = 0; i < per_k_count; ++i) {
      const Document& doc = docs[candidates[i]];
      const std::uint64_t inst_seed = derive_seed(seed, doc.id, k);
      const ShuffleInstance inst = make_instance(doc, k, inst_seed);
      Xoshiro256 side_rng(derive_seed(seed, doc.id, k, kSideSalt));
      const Side side = side_rng.below(2) == 0 ? Side::kA : Side::kB;

      AnnotationItem item;
      item.item_id = item_name(out.bundle.items.size() + 1);
      item.k = k;
      item.text_a = texts(side == Side::kA ? inst.shuffled : inst.original);
      item.text_b = texts(side == Side::kA ? inst.original : inst.shuffled);
      out.key.entries[item.item_id] = {item.item_id, doc.id, k, side, inst_seed, inst.permutation};
      out.bundle.items.push_back(std::move(item));
    }
  }
  return out;
}

json bundle_to_json(const AnnotationBundle& b) {
  json items = json::array();
  for (const auto& it : b.items) {
    items.push_back({{"item_id", it.item_id}, {"k", it.k}, {"text_A", it.text_a},
                     {"text_B", it.text_b}});
  }
  return {{"format", "kblock-annotation-bundle"}, {"version", 1}, {"items", std::move(items)}};
}

AnnotationBundle bundle_from_json(const json& j) {
  try {
    if (j.value("format", "") != "kblock-annotation-bundle") {
      throw ConfigError("not an annotation bundle");
    }
    AnnotationBundle b;
    for (const auto& it : j.at("items")) {
      b.items.push_back({it.at("item_id").get<std::string>(), it.at("k").get<std::size_t>(),
                         it.at("text_A").get<std::vector<std::string>>(),
                         it.at("text_B").get<std::vector<std::string>>()});
    }
    return b;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed bundle: ") + e.what());
  }
}

json key_to_json(const AnswerKey& k) {
  json items = json::array();
  for (const auto& [id, e] : k.entries) {
    items.push_back({{"item_id", id},
                     {"doc_id", e.doc_id},
                     {"k", e.k},
                     {"shuffled", std::string(1, to_char(e.shuffled_side))},
                     {"seed", e.seed},
                     {"permutation", e.permutation}});
  }
  return {{"format", "kblock-annotation-key"},
          {"version", 1},
          {"presentation_seed", k.presentation_seed},
          {"items", std::move(items)}};
}

AnswerKey key_from_json(const json& j) {
  try {
    if (j.value("format", "") != "kblock-annotation-key") {
      throw ConfigError("not an annotation answer key");
    }
    AnswerKey k;
    k.presentation_seed = j.at("presentation_seed").get<std::uint64_t>();
    for (const auto& it : j.at("items")) {
      KeyEntry e;
      e.item_id = it.at("item_id").get<std::string>();
      e.doc_id = it.at("doc_id").get<std::string>();
      e.k = it.at("k").get<std::size_t>();
      e.shuffled_side = parse_side(it.at("shuffled").get<std::string>());
      e.seed = it.at("seed").get<std::uint64_t>();
      e.permutation = it.at("permutation").get<Permutation>();
      k.entries[e.item_id] = std::move(e);
    }
    return k;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed answer key: ") + e.what());
  }
}

std::vector<AnnotationRecord> read_records_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  std::vector<AnnotationRecord> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto fields = csv_fields(line, lineno);
    for (auto& f : fields) f = trim(f);
    if (!have_header) {
      const std::vector<std::string> want = {"item_id", "annotator_id", "choice",
                                             "elapsed_seconds"};
      if (fields != want) {
        throw ConfigError("records header must be item_id,annotator_id,choice,elapsed_seconds");
      }
      have_header = true;
      continue;
    }
    const std::string where = "records line " + std::to_string(lineno) + ": ";
    if (fields.size() != 4) throw ConfigError(where + "expected 4 fields");
    AnnotationRecord r;
    r.item_id = fields[0];
    r.annotator_id = fields[1];
    if (r.item_id.empty() || r.annotator_id.empty()) throw ConfigError(where + "empty id");
    try {
      r.choice = parse_side(fields[2]);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
    const auto& t = fields[3];
    auto res = std::from_chars(t.data(), t.data() + t.size(), r.elapsed_seconds);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size() ||
        !std::isfinite(r.elapsed_seconds) || r.elapsed_seconds < 0) {
      throw ConfigError(where + "elapsed_seconds must be a non-negative number");
    }
    out.push_back(std::move(r));
  }
  if (!have_header) throw ConfigError("records file is empty");
  return out;
}

std::vector<AnnotationRecord> read_records_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open records file " + path.string());
  return read_records_csv(in);
}

double cohen_kappa(const std::vector<std::string>& x, const std::vector<std::string>& y) {
  if (x.size() != y.size()) throw Error("kappa: annotators labeled different item counts");
  if (x.empty()) throw Error("kappa: no items");
  // Integer counts keep the result exactly symmetric and label-invariant:
  // kappa = (agree * n - sum_c cx_c * cy_c) / (n^2 - sum_c cx_c * cy_c).
  std::map<std::string, std::pair<long long, long long>> marg;
  long long agree = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == y[i]) ++agree;
    ++marg[x[i]].first;
    ++marg[y[i]].second;
  }
  const long long n = static_cast<long long>(x.size());
  long long chance = 0;
  for (const auto& [_, c] : marg) chance += c.first * c.second;
  const long long denom = n * n - chance;
  if (denom == 0) throw Error("degenerate marginals");
  return static_cast<double>(agree * n - chance) / static_cast<double>(denom);
}

double cohen_kappa(const std::map<std::string, std::string>& x,
                   const std::map<std::string, std::string>& y) {
  std::vector<std::string> a, b;
  auto it = y.begin();
  if (x.size() != y.size()) throw Error("kappa: mismatched item sets");
  for (const auto& [item, label] : x) {
    if (it->first != item) throw Error("kappa: mismatched item sets");
    a.push_back(label);
    b.push_back(it->second);
    ++it;
  }
  return cohen_kappa(a, b);
}

AnnotationSummary score_annotations(const std::vector<AnnotationRecord>& records,
                                    const AnswerKey& key) {
  AnnotationSummary s;
  std::map<std::string, std::map<std::string, std::string>> labels;  // annotator -> item
  std::vector<double> small, large;
  for (const auto& r : records) {
    auto it = key.entries.find(r.item_id);
    if (it == key.entries.end()) throw Error("unknown item_id \"" + r.item_id + "\"");
    const std::string label(1, to_char(r.choice));
    if (!labels[r.annotator_id].emplace(r.item_id, label).second) {
      throw Error("duplicate record for item_id \"" + r.item_id + "\" and annotator \"" +
                  r.annotator_id + "\"");
    }
    const std::size_t k = it->second.k;
    const bool correct = r.choice == it->second.shuffled_side;
    for (Accuracy* a : {&s.per_annotator[r.annotator_id][k], &s.per_k[k]}) {
      ++a->n;
      if (correct) ++a->correct;
    }
    if (k == 1 || k == 2) small.push_back(r.elapsed_seconds);
    if (k >= 3 && k <= 5) large.push_back(r.elapsed_seconds);
  }

  std::vector<double> pair_kappas;
  std::map<std::size_t, std::vector<double>> by_k;
  for (auto a = labels.begin(); a != labels.end(); ++a) {
    for (auto b = std::next(a); b != labels.end(); ++b) {
      PairKappa p;
      p.annotator_x = a->first;
      p.annotator_y = b->first;
      std::vector<std::string> x, y;
      std::map<std::size_t, std::pair<std::vector<std::string>, std::vector<std::string>>> per_k;
      for (const auto& [item, label] : a->second) {
        auto other = b->second.find(item);
        if (other == b->second.end()) continue;
        x.push_back(label);
        y.push_back(other->second);
        auto& slot = per_k[key.entries.at(item).k];
        slot.first.push_back(label);
        slot.second.push_back(other->second);
      }
      p.n_items = x.size();
      if (p.n_items == 0) continue;
      p.kappa = kappa_or_none(x, y);
      if (p.kappa) pair_kappas.push_back(*p.kappa);
      for (const auto& [k, v] : per_k) {
        if (auto kk = kappa_or_none(v.first, v.second)) {
          p.per_k[k] = *kk;
          by_k[k].push_back(*kk);
        }
      }
      s.pairs.push_back(std::move(p));
    }
  }
  s.mean_kappa = mean(pair_kappas);
  for (const auto& [k, v] : by_k) s.kappa_per_k[k] = *mean(v);
  if (!s.kappa_per_k.empty()) {
    auto [lo, hi] = std::minmax_element(
        s.kappa_per_k.begin(), s.kappa_per_k.end(),
        [](const auto& l, const auto& r) { return l.second < r.second; });
    s.kappa_range = std::make_pair(lo->second, hi->second);
  }
  s.mean_seconds_small = mean(small);
  s.mean_seconds_large = mean(large);
  if (s.mean_seconds_small && s.mean_seconds_large && *s.mean_seconds_small > 0) {
    s.timing_ratio = *s.mean_seconds_large / *s.mean_seconds_small;
  }
  return s;
}

json summary_to_json(const AnnotationSummary& s) {
  auto acc_json = [](const Accuracy& a) {
    return json{{"n", a.n}, {"correct", a.correct}, {"accuracy", a.value()}};
  };
  json annotators = json::object();
  for (const auto& [who, per_k] : s.per_annotator) {
    json ks = json::object();
    for (const auto& [k, a] : per_k) ks[std::to_string(k)] = acc_json(a);
    annotators[who] = std::move(ks);
  }
  json pooled = json::object();
  for (const auto& [k, a] : s.per_k) pooled[std::to_string(k)] = acc_json(a);
  json pairs = json::array();
  for (const auto& p : s.pairs) {
    json pk = json::object();
    for (const auto& [k, v] : p.per_k) pk[std::to_string(k)] = v;
    pairs.push_back({{"annotators", {p.annotator_x, p.annotator_y}},
                     {"n_items", p.n_items},
                     {"kappa", opt(p.kappa)},
                     {"per_k", std::move(pk)}});
  }
  json kpk = json::object();
  for (const auto& [k, v] : s.kappa_per_k) kpk[std::to_string(k)] = v;
  json range = s.kappa_range ? json{s.kappa_range->first, s.kappa_range->second} : json(nullptr);
  return {{"accuracy_per_annotator", std::move(annotators)},
          {"accuracy_per_k", std::move(pooled)},
          {"pairs", std::move(pairs)},
          {"mean_kappa", opt(s.mean_kappa)},
          {"kappa_per_k", std::move(kpk)},
          {"kappa_range", std::move(range)},
          {"timing",
           {{"mean_seconds_k1_2", opt(s.mean_seconds_small)},
            {"mean_seconds_k3_5", opt(s.mean_seconds_large)},
            {"ratio", opt(s.timing_ratio)}}}};
}

std::string render_summary(const AnnotationSummary& s) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(3);
  out << "accuracy by k:";
  for (const auto& [k, a] : s.per_k) out << "  k=" << k << " " << a.value() << " (" << a.n << ")";
  out << '\n';
  for (const auto& [who, per_k] : s.per_annotator) {
    out << "  " << who << ':';
    for (const auto& [k, a] : per_k) out << "  k=" << k << " " << a.value();
    out << '\n';
  }
  for (const auto& p : s.pairs) {
    out << "kappa " << p.annotator_x << " vs " << p.annotator_y << ": ";
    if (p.kappa) {
      out << *p.kappa;
    } else {
      out << "undefined";
    }
    out << " over " << p.n_items << " items\n";
  }
  if (s.mean_kappa) out << "mean kappa: " << *s.mean_kappa << '\n';
  if (s.kappa_range) {
    out << "per-k kappa range: " << s.kappa_range->first << " - " << s.kappa_range->second << '\n';
  }
  if (s.timing_ratio) {
    out << "mean seconds k=1-2: " << *s.mean_seconds_small << ", k=3-5: "
        << *s.mean_seconds_large << ", ratio " << *s.timing_ratio << '\n';
  }
  return out.str();
}

}  // namespace kblock
