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

#include "kblock/corpus.h"

#include <gtest/gtest.h>

#include <algorithm>

#include "kblock/error.h"
#include "kblock/rng.h"
#include "support/temp_dir.h"

namespace kblock {
namespace {

using testing::TempDir;

std::vector<std::string> texts(const std::vector<Sentence>& s) {
  std::vector<std::string> out;
  for (const auto& x : s) out.push_back(x.text);
  return out;
}

std::vector<std::string> texts(const Document& d) { return texts(d.sentences); }

using Strings = std::vector<std::string>;

TEST(TokenizeTest, SplitsPunctuation) {
  EXPECT_EQ(tokenize("Hello, world!"), (Strings{"hello", ",", "world", "!"}));
}

TEST(TokenizeTest, EmptyInput) { EXPECT_TRUE(tokenize("").empty()); }

TEST(TokenizeTest, InternalPeriodsDoNotSplit) {
  EXPECT_EQ(tokenize("U.S. bills"), (Strings{"u.s.", "bills"}));
}

TEST(TokenizeTest, InternalPunctuationStays) {
  EXPECT_EQ(tokenize("Don't say \"well-known\"."),
            (Strings{"don't", "say", "\"", "well-known", "\"", "."}));
}

TEST(TokenizeTest, OrdinaryTrailingPeriodSplits) {
  EXPECT_EQ(tokenize("End."), (Strings{"end", "."}));
  EXPECT_EQ(tokenize("(wait...)"), (Strings{"(", "wait", ".", ".", ".", ")"}));
}

TEST(TokenizeTest, UnicodeQuotesArePunctuation) {
  EXPECT_EQ(tokenize("\xE2\x80\x9CYes\xE2\x80\x9D"),
            (Strings{"\xE2\x80\x9C", "yes", "\xE2\x80\x9D"}));
}

TEST(TokenizeTest, Deterministic) {
  const std::string s = "Mr. Smith, of the U.K., said: (nothing) -- really?";
  EXPECT_EQ(tokenize(s), tokenize(s));
}

TEST(SegmentTest, TwoPlainSentences) {
  EXPECT_EQ(texts(segment_sentences("I left. He stayed.")), (Strings{"I left.", "He stayed."}));
}

TEST(SegmentTest, InitialsSplit) {
  EXPECT_EQ(texts(segment_sentences("A. B.")), (Strings{"A.", "B."}));
}

TEST(SegmentTest, AbbreviationDoesNotEndSentence) {
  // "Dr." is on the default list, so the first period is not a boundary;
  // "arrived." is a plain word followed by a capital, so it is.
  EXPECT_EQ(texts(segment_sentences("Dr. Smith arrived. We began.")),
            (Strings{"Dr. Smith arrived.", "We began."}));
}

TEST(SegmentTest, NoTerminalPunctuation) {
  EXPECT_EQ(texts(segment_sentences("No terminal punctuation")),
            (Strings{"No terminal punctuation"}));
}

TEST(SegmentTest, EmptyInputThrows) {
  EXPECT_THROW(segment_sentences(""), Error);
  try {
    segment_sentences("  \n\t ");
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "empty document");
  }
}

TEST(SegmentTest, QuestionAndExclamationAndClosers) {
  EXPECT_EQ(texts(segment_sentences("Is it? Yes! \"Done.\" Then more.")),
            (Strings{"Is it?", "Yes!", "\"Done.\"", "Then more."}));
}

TEST(SegmentTest, LowercaseContinuation) {
  EXPECT_EQ(texts(segment_sentences("'Why?' asked Alice. She sat.")),
            (Strings{"'Why?' asked Alice.", "She sat."}));
  SegmenterOptions strict;
  strict.lowercase_continues = false;
  EXPECT_EQ(texts(segment_sentences("'Why?' asked Alice.", strict)),
            (Strings{"'Why?'", "asked Alice."}));
}

TEST(SegmentTest, CustomAbbreviations) {
  SegmenterOptions opts;
  opts.abbreviations = {"approx."};
  EXPECT_EQ(texts(segment_sentences("It is approx. Ten. Dr. No.", opts)),
            (Strings{"It is approx. Ten.", "Dr.", "No."}));
}

TEST(SegmentTest, BlankLineForcesBoundary) {
  EXPECT_EQ(texts(segment_sentences("A heading\n\nBody text here.")),
            (Strings{"A heading", "Body text here."}));
}

TEST(SegmentTest, CollapsesWhitespace) {
  EXPECT_EQ(texts(segment_sentences("  One\t two.\n Three  ")), (Strings{"One two.", "Three"}));
}

std::string strip_ws(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c != ' ' && c != '\t' && c != '\n' && c != '\r') out += c;
  }
  return out;
}

TEST(SegmentTest, NeverDropsCharacters) {
  const std::string alphabet = "ab Z.!?\"')(\n,-";
  Xoshiro256 rng(1);
  for (int trial = 0; trial < 500; ++trial) {
    std::string text;
    const std::size_t len = 1 + rng.below(80);
    for (std::size_t i = 0; i < len; ++i) text += alphabet[rng.below(alphabet.size())];
    if (strip_ws(text).empty()) continue;
    std::string joined;
    for (const auto& s : segment_sentences(text)) joined += s.text + " ";
    EXPECT_EQ(strip_ws(joined), strip_ws(text)) << text;
  }
}

TEST(SentenceTest, TokensRoundTrip) {
  for (const auto& s : segment_sentences("Mr. Brown's cat, aged 3, left. (It came back!) Well.")) {
    EXPECT_EQ(tokenize(s.text), s.tokens);
    EXPECT_FALSE(s.tokens.empty());
  }
}

Document numbered(std::size_t n) {
  std::vector<std::string> s;
  for (std::size_t i = 0; i < n; ++i) s.push_back("S" + std::to_string(i) + ".");
  return make_document("d", s);
}

TEST(TruncateTest, CutsToLimit) {
  const Document d = numbered(25);
  const Document t = truncate(d);
  ASSERT_EQ(t.size(), 20u);
  EXPECT_EQ(t.id, "d");
  EXPECT_EQ(t.sentences.back().text, "S19.");
}

TEST(TruncateTest, UnderAndAtLimitAreNoOps) {
  EXPECT_EQ(truncate(numbered(5)), numbered(5));
  EXPECT_EQ(truncate(numbered(20)), numbered(20));
}

TEST(TruncateTest, Idempotent) {
  for (std::size_t n : {1, 7, 20, 33}) {
    const Document d = numbered(n);
    EXPECT_EQ(truncate(truncate(d, 6), 6), truncate(d, 6));
  }
}

TEST(MakeDocumentTest, DropsBlankSentences) {
  const Document d = make_document("x", {"One.", "  ", "Two."});
  EXPECT_EQ(texts(d), (Strings{"One.", "Two."}));
  EXPECT_THROW(make_document("y", {" "}), Error);
}

TEST(IngestJsonlTest, SegmentsText) {
  TempDir dir;
  const auto p = dir.write("c.jsonl", R"({"text":"A. B."})" "\n");
  const auto r = ingest_jsonl(p);
  ASSERT_EQ(r.corpus.size(), 1u);
  EXPECT_EQ(texts(r.corpus.documents[0]), (Strings{"A.", "B."}));
  EXPECT_EQ(r.corpus.documents[0].id, "doc-1");
}

TEST(IngestJsonlTest, PreSegmentedPassthrough) {
  TempDir dir;
  const auto p = dir.write("c.jsonl", R"({"sentences":["Hello there.","Bye."]})" "\n");
  IngestOptions opts;
  opts.pre_segmented = true;
  const auto r = ingest_jsonl(p, opts);
  EXPECT_EQ(texts(r.corpus.documents[0]), (Strings{"Hello there.", "Bye."}));
}

TEST(IngestJsonlTest, PreservesOrderAndAssignsIds) {
  TempDir dir;
  const auto p = dir.write("c.jsonl",
                           "{\"id\":\"z\",\"text\":\"Last one.\"}\n"
                           "\n"
                           "{\"text\":\"No id.\"}\n"
                           "{\"id\":\"a\",\"text\":\"First.\",\"meta\":{\"src\":\"wsj\"}}\n");
  const auto r = ingest_jsonl(p);
  ASSERT_EQ(r.corpus.size(), 3u);
  EXPECT_EQ(r.corpus.documents[0].id, "z");
  EXPECT_EQ(r.corpus.documents[1].id, "doc-3");
  EXPECT_EQ(r.corpus.documents[2].id, "a");
  EXPECT_EQ(r.corpus.documents[2].source_meta.at("src"), "wsj");
  EXPECT_EQ(r.corpus.documents[2].source_meta.at("line"), "4");
}

TEST(IngestJsonlTest, MalformedLineNamesLineNumber) {
  TempDir dir;
  const auto p = dir.write("c.jsonl", "{\"text\":\"ok.\"}\n{\"text\": oops}\n");
  try {
    ingest_jsonl(p);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(IngestJsonlTest, EmptyTextIsSkippedAndReported) {
  TempDir dir;
  const auto p = dir.write("c.jsonl", "{\"id\":\"e\",\"text\":\"   \"}\n{\"text\":\"Kept.\"}\n");
  const auto r = ingest_jsonl(p);
  ASSERT_EQ(r.corpus.size(), 1u);
  ASSERT_EQ(r.report.skipped.size(), 1u);
  EXPECT_EQ(r.report.skipped[0].doc_id, "e");
  EXPECT_EQ(r.report.skipped[0].line, 1u);
}

TEST(IngestJsonlTest, RejectsDuplicateIdsAndBadFields) {
  TempDir dir;
  EXPECT_THROW(ingest_jsonl(dir.write("a.jsonl", "{\"id\":\"x\",\"text\":\"A.\"}\n"
                                                 "{\"id\":\"x\",\"text\":\"B.\"}\n")),
               ConfigError);
  EXPECT_THROW(ingest_jsonl(dir.write("b.jsonl", "{\"id\":3,\"text\":\"A.\"}\n")), ConfigError);
  EXPECT_THROW(ingest_jsonl(dir.write("c.jsonl", "{\"id\":\"q\"}\n")), ConfigError);
  EXPECT_THROW(ingest_jsonl(dir.write("d.jsonl", "[1,2]\n")), ConfigError);
  EXPECT_THROW(ingest_jsonl(dir / "missing.jsonl"), ConfigError);
}

TEST(IngestTextTest, DirectoryInNameOrder) {
  TempDir dir;
  dir.write("docs/b.txt", "Second file. It has two sentences.");
  dir.write("docs/a.txt", "First file.\n\nNew paragraph here.");
  dir.write("docs/skip.md", "Not a text file.");
  const auto r = ingest_text(dir / "docs");
  ASSERT_EQ(r.corpus.size(), 2u);
  EXPECT_EQ(r.corpus.documents[0].id, "a");
  EXPECT_EQ(texts(r.corpus.documents[0]), (Strings{"First file.", "New paragraph here."}));
  EXPECT_EQ(r.corpus.documents[1].size(), 2u);
}

TEST(IngestTextTest, PreSegmentedLines) {
  TempDir dir;
  const auto p = dir.write("one.txt", "line one\n\nline two. still two\n");
  IngestOptions opts;
  opts.pre_segmented = true;
  EXPECT_EQ(texts(ingest_text(p, opts).corpus.documents[0]),
            (Strings{"line one", "line two. still two"}));
}

}  // namespace
}  // namespace kblock
