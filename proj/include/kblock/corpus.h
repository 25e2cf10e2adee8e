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

// Corpus ingestion: JSONL and plain-text readers, a rule-based sentence
// segmenter, the word-level tokenizer used by the built-in scorer, and the
// sentence-count truncation applied before any shuffling.

#ifndef KBLOCK_CORPUS_H_
#define KBLOCK_CORPUS_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace kblock {

using Token = std::string;

// Lowercases ASCII letters, splits on whitespace and peels leading and
// trailing punctuation off each word into one-character tokens. Internal
// punctuation stays put ("don't", "well-known"). A word that carries an
// internal period keeps its trailing period, so "U.S." is one token.
std::vector<Token> tokenize(std::string_view text);

struct Sentence {
  std::string text;  // trimmed, internal whitespace collapsed
  std::vector<Token> tokens;

  // Builds the sentence and its tokens from raw text.
  static Sentence from_text(std::string_view text);

  bool operator==(const Sentence&) const = default;
};

struct Document {
  std::string id;
  std::vector<Sentence> sentences;
  std::map<std::string, std::string> source_meta;

  std::size_t size() const { return sentences.size(); }
  bool operator==(const Document&) const = default;
};

struct Corpus {
  std::vector<Document> documents;
  std::string domain = "unknown";

  bool empty() const { return documents.empty(); }
  std::size_t size() const { return documents.size(); }
};

struct SegmenterOptions {
  // Lowercase entries, each ending in '.'. Matched case-insensitively
  // against the word carrying the period (leading quotes stripped).
  std::vector<std::string> abbreviations = default_abbreviations();
  // Do not break when the next word starts with a lowercase letter
  // ("'Why?' asked Alice." stays one sentence).
  bool lowercase_continues = true;

  static std::vector<std::string> default_abbreviations();
};

// Splits text into sentences. A boundary follows a word ending in '.', '!' or
// '?' (optionally followed by closing quotes or brackets) unless the word is
// a known abbreviation or the next word continues in lowercase. A blank line
// always ends a sentence. Throws kblock::Error("empty document") on
// whitespace-only input.
std::vector<Sentence> segment_sentences(std::string_view text,
                                        const SegmenterOptions& opts = {});

// First min(size, max_sentences) sentences, same id and metadata.
Document truncate(const Document& doc, std::size_t max_sentences = 20);

struct IngestIssue {
  std::size_t line = 0;  // 1-based; 0 for whole-file issues
  std::string doc_id;
  std::string reason;
};

struct IngestReport {
  std::vector<IngestIssue> skipped;
  std::vector<IngestIssue> notes;  // dropped blank sentences and similar
};

struct IngestResult {
  Corpus corpus;
  IngestReport report;
};

struct IngestOptions {
  bool pre_segmented = false;
  SegmenterOptions segmenter;
  std::string domain = "unknown";
};

// One JSON object per line: optional "id", "text" or "sentences", optional
// "meta" (object of strings). Missing ids become "doc-<line>". Malformed
// lines and duplicate ids raise ConfigError naming the line.
IngestResult ingest_jsonl(const std::filesystem::path& path,
                          const IngestOptions& opts = {});

// Plain text: one document per file, id = file stem. Paragraphs are
// separated by blank lines; with pre_segmented each non-blank line is one
// sentence. A directory path ingests every regular "*.txt" file in it,
// sorted by name as the document order.
IngestResult ingest_text(const std::filesystem::path& path,
                         const IngestOptions& opts = {});

// Builds a document from already split sentence strings, dropping blank
// entries. Throws if nothing remains.
Document make_document(std::string id, const std::vector<std::string>& sentences);

}  // namespace kblock

#endif  // KBLOCK_CORPUS_H_
