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

#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "kblock/error.h"
#include "kblock/rng.h"
#include "support/mock_scorers.h"

namespace kblock {
namespace {

using nlohmann::json;
using testing::numbered_corpus;

// Kappa from observed and chance agreement proportions.
double kappa_oracle(const std::vector<std::string>& x, const std::vector<std::string>& y) {
  const double n = static_cast<double>(x.size());
  std::map<std::string, double> px, py;
  double po = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    po += x[i] == y[i];
    px[x[i]] += 1;
    py[y[i]] += 1;
  }
  po /= n;
  double pe = 0;
  for (const auto& [label, c] : px) pe += (c / n) * (py.count(label) ? py[label] / n : 0.0);
  return (po - pe) / (1 - pe);
}

std::vector<std::string> labels(const std::string& s) {
  std::vector<std::string> out;
  for (char c : s) out.emplace_back(1, c);
  return out;
}

TEST(SideTest, Parse) {
  EXPECT_EQ(parse_side("A"), Side::kA);
  EXPECT_EQ(parse_side("b"), Side::kB);
  EXPECT_EQ(to_char(Side::kB), 'B');
  EXPECT_THROW(parse_side("C"), ConfigError);
  EXPECT_THROW(parse_side(""), ConfigError);
}

TEST(GenerateBundleTest, CountsAndIds) {
  const Corpus c = numbered_corpus(150, 12);
  const GeneratedBundle g = generate_bundle(c, {1, 2, 3, 4, 5}, 100, 9);
  ASSERT_EQ(g.bundle.items.size(), 500u);
  EXPECT_EQ(g.key.entries.size(), 500u);
  EXPECT_EQ(g.bundle.items.front().item_id, "item-0001");
  EXPECT_EQ(g.bundle.items.back().item_id, "item-0500");
  std::map<std::size_t, std::set<std::string>> docs_per_k;
  for (const auto& item : g.bundle.items) {
    const KeyEntry& e = g.key.entries.at(item.item_id);
    EXPECT_EQ(e.k, item.k);
    EXPECT_TRUE(docs_per_k[e.k].insert(e.doc_id).second) << "sampled twice: " << e.doc_id;
  }
  for (const auto& [k, docs] : docs_per_k) EXPECT_EQ(docs.size(), 100u);
}

TEST(GenerateBundleTest, SidesHoldOriginalAndShuffled) {
  const Corpus c = numbered_corpus(40, 8);
  std::map<std::string, std::vector<std::string>> originals;
  for (const auto& d : c.documents) originals[d.id] = testing::sentence_texts(d);
  const GeneratedBundle g = generate_bundle(c, {1, 3}, 20, 4);
  for (const auto& item : g.bundle.items) {
    const KeyEntry& e = g.key.entries.at(item.item_id);
    const auto& orig = originals.at(e.doc_id);
    const auto& shuffled = e.shuffled_side == Side::kA ? item.text_a : item.text_b;
    const auto& intact = e.shuffled_side == Side::kA ? item.text_b : item.text_a;
    EXPECT_EQ(intact, orig);
    EXPECT_NE(shuffled, orig);
    const Document doc = make_document(e.doc_id, orig);
    EXPECT_EQ(shuffled, testing::sentence_texts(make_instance(doc, e.k, e.seed).shuffled));
    EXPECT_EQ(e.permutation, make_instance(doc, e.k, e.seed).permutation);
  }
}

TEST(GenerateBundleTest, SideIsBalanced) {
  const Corpus c = numbered_corpus(10000, 2);
  const GeneratedBundle g = generate_bundle(c, {1}, 10000, 31);
  std::size_t a = 0;
  for (const auto& [_, e] : g.key.entries) a += e.shuffled_side == Side::kA;
  EXPECT_NEAR(static_cast<double>(a) / 10000.0, 0.5, 0.02);
}

TEST(GenerateBundleTest, Errors) {
  const Corpus one = numbered_corpus(1, 4);
  EXPECT_EQ(generate_bundle(one, {1}, 1, 1).bundle.items.size(), 1u);
  try {
    generate_bundle(one, {1}, 2, 1);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("insufficient testable documents for k=1", 0), 0u);
  }
  EXPECT_EQ(generate_bundle(one, {3}, 1, 1).bundle.items.size(), 1u);  // blocks of 3 and 1
  EXPECT_THROW(generate_bundle(one, {4}, 1, 1), ConfigError);
  EXPECT_THROW(generate_bundle(one, {1, 1}, 1, 1), ConfigError);
  EXPECT_THROW(generate_bundle(one, {0}, 1, 1), ConfigError);
  EXPECT_THROW(generate_bundle(one, {1}, 0, 1), ConfigError);
}

TEST(GenerateBundleTest, Deterministic) {
  const Corpus c = numbered_corpus(30, 6);
  const auto a = generate_bundle(c, {1, 2}, 10, 77);
  const auto b = generate_bundle(c, {1, 2}, 10, 77);
  EXPECT_EQ(a.bundle, b.bundle);
  EXPECT_EQ(a.key, b.key);
  EXPECT_NE(generate_bundle(c, {1, 2}, 10, 78).key, a.key);
}

TEST(BundleJsonTest, BundleIsBlind) {
  const Corpus c = numbered_corpus(5, 4);
  const GeneratedBundle g = generate_bundle(c, {1}, 5, 3);
  const json j = bundle_to_json(g.bundle);
  EXPECT_EQ(j["format"], "kblock-annotation-bundle");
  for (const auto& item : j["items"]) {
    std::set<std::string> keys;
    for (const auto& [key, _] : item.items()) keys.insert(key);
    EXPECT_EQ(keys, (std::set<std::string>{"item_id", "k", "text_A", "text_B"}));
  }
  EXPECT_EQ(j.dump().find("doc-0000"), std::string::npos);
  EXPECT_EQ(bundle_from_json(j), g.bundle);
  const json kj = key_to_json(g.key);
  EXPECT_EQ(kj["format"], "kblock-annotation-key");
  EXPECT_EQ(key_from_json(kj), g.key);
  EXPECT_THROW(bundle_from_json(kj), ConfigError);
  EXPECT_THROW(key_from_json(j), ConfigError);
}

TEST(CohenKappaTest, WorkedExample) {
  // Observed agreement 0.75, chance agreement 0.5.
  const auto x = labels("AABB");
  const auto y = labels("ABBB");
  EXPECT_DOUBLE_EQ(cohen_kappa(x, y), 0.5);
  EXPECT_DOUBLE_EQ(cohen_kappa(x, y), kappa_oracle(x, y));
}

TEST(CohenKappaTest, MatchesOracleOnRandomLabels) {
  Xoshiro256 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(60);
    std::vector<std::string> x, y;
    for (std::size_t i = 0; i < n; ++i) {
      x.emplace_back(1, "AB"[rng.below(2)]);
      y.emplace_back(1, rng.uniform() < 0.7 ? x.back()[0] : "AB"[rng.below(2)]);
    }
    double expected;
    try {
      expected = cohen_kappa(x, y);
    } catch (const Error&) {
      continue;  // both raters constant on the same label
    }
    EXPECT_NEAR(expected, kappa_oracle(x, y), 1e-12);
    EXPECT_EQ(cohen_kappa(x, y), cohen_kappa(y, x));
  }
}

TEST(CohenKappaTest, PerfectAndAntiAgreement) {
  EXPECT_EQ(cohen_kappa(labels("ABAB"), labels("ABAB")), 1.0);
  EXPECT_EQ(cohen_kappa(labels("ABAB"), labels("BABA")), -1.0);
  // Relabeling both raters consistently changes nothing.
  EXPECT_EQ(cohen_kappa(labels("AABAB"), labels("ABBAB")),
            cohen_kappa(labels("BBABA"), labels("BAABA")));
}

TEST(CohenKappaTest, IndependentRatersNearZero) {
  Xoshiro256 rng(99);
  std::vector<std::string> x, y;
  for (int i = 0; i < 100000; ++i) {
    x.emplace_back(1, "AB"[rng.below(2)]);
    y.emplace_back(1, "AB"[rng.below(2)]);
  }
  EXPECT_LT(std::abs(cohen_kappa(x, y)), 0.02);
}

TEST(CohenKappaTest, Errors) {
  try {
    cohen_kappa(labels("AAA"), labels("AAA"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "degenerate marginals");
  }
  EXPECT_THROW(cohen_kappa(labels("AB"), labels("ABA")), Error);
  EXPECT_THROW(cohen_kappa(std::vector<std::string>{}, std::vector<std::string>{}), Error);
  const std::map<std::string, std::string> a = {{"i1", "A"}, {"i2", "B"}};
  const std::map<std::string, std::string> b = {{"i1", "A"}, {"i3", "B"}};
  try {
    cohen_kappa(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "kappa: mismatched item sets");
  }
  EXPECT_EQ(cohen_kappa(a, a), 1.0);
}

AnswerKey toy_key() {
  AnswerKey key;
  const std::vector<std::pair<std::size_t, Side>> spec = {
      {1, Side::kA}, {1, Side::kB}, {2, Side::kA}, {2, Side::kB},
      {3, Side::kA}, {4, Side::kB}, {5, Side::kA}, {5, Side::kB}};
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const std::string id = "item-" + std::to_string(i + 1);
    key.entries[id] = {id, "doc" + std::to_string(i), spec[i].first, spec[i].second, 0, {1, 0}};
  }
  return key;
}

TEST(ScoreAnnotationsTest, AccuracyKappaAndTiming) {
  const AnswerKey key = toy_key();
  std::vector<AnnotationRecord> records;
  // Annotator x is always right; y flips items 2 and 5 (k=1 and k=3).
  for (const auto& [id, e] : key.entries) {
    const double secs = e.k <= 2 ? 10.0 : 14.0;
    records.push_back({id, "x", e.shuffled_side, secs});
    const bool flip = id == "item-2" || id == "item-5";
    const Side other = e.shuffled_side == Side::kA ? Side::kB : Side::kA;
    records.push_back({id, "y", flip ? other : e.shuffled_side, secs});
  }
  const AnnotationSummary s = score_annotations(records, key);
  EXPECT_EQ(s.per_annotator.at("x").at(1).value(), 1.0);
  EXPECT_EQ(s.per_annotator.at("y").at(1).value(), 0.5);
  EXPECT_EQ(s.per_annotator.at("y").at(3).value(), 0.0);
  EXPECT_EQ(s.per_k.at(1).n, 4u);
  EXPECT_EQ(s.per_k.at(1).correct, 3u);
  ASSERT_EQ(s.pairs.size(), 1u);
  EXPECT_EQ(s.pairs[0].n_items, 8u);
  std::vector<std::string> x, y;
  for (const auto& r : records) (r.annotator_id == "x" ? x : y).emplace_back(1, to_char(r.choice));
  EXPECT_NEAR(*s.pairs[0].kappa, kappa_oracle(x, y), 1e-12);
  EXPECT_EQ(*s.mean_kappa, *s.pairs[0].kappa);
  // One item each: the k=4 agreement has chance agreement 1 and no kappa,
  // the k=3 disagreement has chance agreement 0 and kappa 0.
  EXPECT_FALSE(s.kappa_per_k.count(4));
  EXPECT_EQ(s.kappa_per_k.at(3), 0.0);
  EXPECT_EQ(s.kappa_range->first, 0.0);
  EXPECT_EQ(s.kappa_per_k.at(5), 1.0);
  EXPECT_EQ(s.kappa_range->second, 1.0);
  EXPECT_DOUBLE_EQ(*s.mean_seconds_small, 10.0);
  EXPECT_DOUBLE_EQ(*s.mean_seconds_large, 14.0);
  EXPECT_DOUBLE_EQ(*s.timing_ratio, 1.4);

  const json j = summary_to_json(s);
  EXPECT_DOUBLE_EQ(j["timing"]["ratio"].get<double>(), 1.4);
  EXPECT_NE(render_summary(s).find("k=1"), std::string::npos);
}

TEST(ScoreAnnotationsTest, PartialOverlapAndSingleAnnotator) {
  const AnswerKey key = toy_key();
  std::vector<AnnotationRecord> records = {{"item-1", "x", Side::kA, 3},
                                           {"item-2", "x", Side::kA, 3},
                                           {"item-3", "y", Side::kA, 3}};
  const AnnotationSummary s = score_annotations(records, key);
  EXPECT_TRUE(s.pairs.empty());  // no co-labeled items
  EXPECT_FALSE(s.mean_kappa);
  EXPECT_FALSE(s.timing_ratio);
  const json j = summary_to_json(s);
  EXPECT_TRUE(j["mean_kappa"].is_null());
}

TEST(ScoreAnnotationsTest, Errors) {
  const AnswerKey key = toy_key();
  try {
    score_annotations({{"item-99", "x", Side::kA, 1}}, key);
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "unknown item_id \"item-99\"");
  }
  EXPECT_THROW(score_annotations({{"item-1", "x", Side::kA, 1}, {"item-1", "x", Side::kB, 2}},
                                 key),
               Error);
}

TEST(RecordsCsvTest, Parses) {
  std::istringstream in(
      "\xEF\xBB\xBFitem_id,annotator_id,choice,elapsed_seconds\r\n"
      "item-0001,ann1,A,12.5\r\n"
      "\"item-0002\",\"ann, two\",b,3\n"
      "\n"
      "item-0003,\"say \"\"hi\"\"\",B,0\n");
  const auto r = read_records_csv(in);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0], (AnnotationRecord{"item-0001", "ann1", Side::kA, 12.5}));
  EXPECT_EQ(r[1].annotator_id, "ann, two");
  EXPECT_EQ(r[1].choice, Side::kB);
  EXPECT_EQ(r[2].annotator_id, "say \"hi\"");
}

TEST(RecordsCsvTest, Rejects) {
  const auto bad = [](const std::string& text) {
    std::istringstream in(text);
    EXPECT_THROW(read_records_csv(in), ConfigError) << text;
  };
  const std::string header = "item_id,annotator_id,choice,elapsed_seconds\n";
  bad("");
  bad("item,annotator,choice,time\n");
  bad(header + "i,a,C,1\n");
  bad(header + "i,a,A\n");
  bad(header + "i,a,A,-1\n");
  bad(header + "i,a,A,soon\n");
  bad(header + ",a,A,1\n");
  bad(header + "\"i,a,A,1\n");
  EXPECT_THROW(read_records_csv(std::filesystem::path("/nonexistent/records.csv")), ConfigError);
}

}  // namespace
}  // namespace kblock
