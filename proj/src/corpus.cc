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

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "kblock/error.h"

namespace kblock {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

// Non-ASCII punctuation treated like ASCII punctuation when it leads or
// trails a word.
constexpr std::string_view kUnicodePunct[] = {
    "“", "”", "‘", "’", "«", "»",
    "—", "–", "…", "¿", "¡",
};

// Byte length of a punctuation character at the start of s, or 0.
std::size_t leading_punct(std::string_view s) {
  if (s.empty()) return 0;
  const auto c = static_cast<unsigned char>(s.front());
  if (c < 0x80) return std::ispunct(c) ? 1 : 0;
  for (std::string_view p : kUnicodePunct) {
    if (s.starts_with(p)) return p.size();
  }
  return 0;
}

// Byte length of a punctuation character at the end of s, or 0.
std::size_t trailing_punct(std::string_view s) {
  if (s.empty()) return 0;
  const auto c = static_cast<unsigned char>(s.back());
  if (c < 0x80) return std::ispunct(c) ? 1 : 0;
  for (std::string_view p : kUnicodePunct) {
    if (s.ends_with(p)) return p.size();
  }
  return 0;
}

bool is_opener(std::string_view s) {
  return s == "\"" || s == "'" || s == "(" || s == "[" || s == "{" ||
         s == "“" || s == "‘" || s == "«";
}

bool is_closer(std::string_view s) {
  return s == "\"" || s == "'" || s == ")" || s == "]" || s == "}" ||
         s == "”" || s == "’" || s == "»";
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

// Letters and dots only, with at least one dot: "U.S", "e.g".
bool dotted_stem(std::string_view stem) {
  bool dot = false;
  for (char c : stem) {
    if (c == '.') {
      dot = true;
    } else if (!std::isalpha(static_cast<unsigned char>(c))) {
      return false;
    }
  }
  return dot;
}

void tokenize_word(std::string_view word, std::vector<Token>& out) {
  std::vector<Token> trailing;
  while (std::size_t n = leading_punct(word)) {
    out.emplace_back(word.substr(0, n));
    word.remove_prefix(n);
  }
  while (std::size_t n = trailing_punct(word)) {
    trailing.emplace_back(word.substr(word.size() - n));
    word.remove_suffix(n);
  }
  std::string stem = ascii_lower(word);
  if (!trailing.empty() && trailing.back() == "." && dotted_stem(stem)) {
    stem += '.';
    trailing.pop_back();
  }
  if (!stem.empty()) out.push_back(std::move(stem));
  out.insert(out.end(), trailing.rbegin(), trailing.rend());
}

struct Word {
  std::string_view text;
  bool paragraph_break_after = false;
};

// Whitespace split that remembers blank lines between words.
std::vector<Word> split_words(std::string_view text) {
  std::vector<Word> words;
  std::size_t i = 0;
  while (i < text.size()) {
    int newlines = 0;
    while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) {
      if (text[i] == '\n') ++newlines;
      ++i;
    }
    if (newlines >= 2 && !words.empty()) words.back().paragraph_break_after = true;
    const std::size_t start = i;
    while (i < text.size() && !is_space(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) words.push_back({text.substr(start, i - start)});
  }
  return words;
}

std::string_view strip_openers(std::string_view w) {
  while (std::size_t n = leading_punct(w)) {
    if (!is_opener(w.substr(0, n))) break;
    w.remove_prefix(n);
  }
  return w;
}

std::string_view strip_closers(std::string_view w) {
  while (std::size_t n = trailing_punct(w)) {
    if (!is_closer(w.substr(w.size() - n))) break;
    w.remove_suffix(n);
  }
  return w;
}

bool ends_sentence(std::string_view word, const SegmenterOptions& opts) {
  const std::string_view core = strip_closers(word);
  if (core.empty()) return false;
  const char last = core.back();
  if (last != '.' && last != '!' && last != '?') return false;
  if (last == '.') {
    const std::string key = ascii_lower(strip_openers(core));
    if (std::find(opts.abbreviations.begin(), opts.abbreviations.end(), key) !=
        opts.abbreviations.end()) {
      return false;
    }
  }
  return true;
}

bool starts_lowercase(std::string_view word) {
  word = strip_openers(word);
  return !word.empty() && word.front() >= 'a' && word.front() <= 'z';
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out += ' ';
      pending_space = false;
      out += c;
    }
  }
  return out;
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  for (const Word& w : split_words(text)) tokenize_word(w.text, out);
  return out;
}

Sentence Sentence::from_text(std::string_view text) {
  Sentence s;
  s.text = collapse_whitespace(text);
  s.tokens = tokenize(s.text);
  return s;
}

std::vector<std::string> SegmenterOptions::default_abbreviations() {
  return {"mr.",  "mrs.", "ms.",   "dr.",  "prof.", "sr.",  "jr.",
          "st.",  "vs.",  "u.s.",  "u.k.", "e.g.",  "i.e.", "etc.",
          "inc.", "ltd.", "capt.", "col.", "gen.",  "lt.",  "rev.",
          "hon.", "messrs.", "mt."};
}

std::vector<Sentence> segment_sentences(std::string_view text,
                                        const SegmenterOptions& opts) {
  const std::vector<Word> words = split_words(text);
  if (words.empty()) throw Error("empty document");

  std::vector<Sentence> out;
  std::string current;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (!current.empty()) current += ' ';
    current.append(words[i].text);

    bool boundary = words[i].paragraph_break_after || i + 1 == words.size();
    if (!boundary && ends_sentence(words[i].text, opts)) {
      boundary = !(opts.lowercase_continues && starts_lowercase(words[i + 1].text));
    }
    if (boundary) {
      out.push_back(Sentence::from_text(current));
      current.clear();
    }
  }
  return out;
}

Document truncate(const Document& doc, std::size_t max_sentences) {
  Document out;
  out.id = doc.id;
  out.source_meta = doc.source_meta;
  const std::size_t n = std::min(doc.sentences.size(), max_sentences);
  out.sentences.assign(doc.sentences.begin(), doc.sentences.begin() + n);
  return out;
}

Document make_document(std::string id, const std::vector<std::string>& sentences) {
  Document doc;
  doc.id = std::move(id);
  for (const auto& s : sentences) {
    Sentence sent = Sentence::from_text(s);
    if (!sent.tokens.empty()) doc.sentences.push_back(std::move(sent));
  }
  if (doc.sentences.empty()) throw Error("empty document");
  return doc;
}

IngestResult ingest_jsonl(const fs::path& path, const IngestOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open corpus " + path.string());

  IngestResult result;
  result.corpus.domain = opts.domain;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (collapse_whitespace(line).empty()) continue;

    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ConfigError(path.string() + ": line " + std::to_string(line_no) +
                        ": malformed JSON: " + e.what());
    }
    auto fail = [&](const std::string& why) {
      throw ConfigError(path.string() + ": line " + std::to_string(line_no) +
                        ": " + why);
    };
    if (!obj.is_object()) fail("expected a JSON object");

    Document doc;
    if (obj.contains("id")) {
      if (!obj["id"].is_string()) fail("\"id\" must be a string");
      doc.id = obj["id"].get<std::string>();
    } else {
      doc.id = "doc-" + std::to_string(line_no);
    }
    if (!seen.insert(doc.id).second) fail("duplicate document id \"" + doc.id + "\"");

    doc.source_meta["origin"] = path.string();
    doc.source_meta["line"] = std::to_string(line_no);
    if (obj.contains("meta")) {
      if (!obj["meta"].is_object()) fail("\"meta\" must be an object");
      for (const auto& [key, value] : obj["meta"].items()) {
        if (!value.is_string()) fail("meta value \"" + key + "\" must be a string");
        doc.source_meta[key] = value.get<std::string>();
      }
    }

    const bool has_text = obj.contains("text");
    const bool has_sentences = obj.contains("sentences");
    if (has_text && !obj["text"].is_string()) fail("\"text\" must be a string");
    if (has_sentences) {
      const auto& arr = obj["sentences"];
      if (!arr.is_array() ||
          !std::all_of(arr.begin(), arr.end(), [](const json& v) { return v.is_string(); })) {
        fail("\"sentences\" must be an array of strings");
      }
    }
    if (!has_text && !has_sentences) fail("missing \"text\" or \"sentences\"");

    const bool use_sentences = has_sentences && (opts.pre_segmented || !has_text);
    if (use_sentences) {
      const auto raw = obj["sentences"].get<std::vector<std::string>>();
      for (const auto& s : raw) {
        Sentence sent = Sentence::from_text(s);
        if (sent.tokens.empty()) {
          result.report.notes.push_back({line_no, doc.id, "dropped blank sentence"});
        } else {
          doc.sentences.push_back(std::move(sent));
        }
      }
    } else {
      const auto text = obj["text"].get<std::string>();
      if (!collapse_whitespace(text).empty()) {
        doc.sentences = segment_sentences(text, opts.segmenter);
      }
    }
    if (doc.sentences.empty()) {
      result.report.skipped.push_back({line_no, doc.id, "empty text"});
      continue;
    }
    result.corpus.documents.push_back(std::move(doc));
  }
  return result;
}

IngestResult ingest_text(const fs::path& path, const IngestOptions& opts) {
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".txt") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
  } else if (fs::exists(path)) {
    files.push_back(path);
  } else {
    throw ConfigError("cannot open corpus " + path.string());
  }

  IngestResult result;
  result.corpus.domain = opts.domain;
  std::set<std::string> seen;
  for (const auto& file : files) {
    Document doc;
    doc.id = file.stem().string();
    if (!seen.insert(doc.id).second) {
      throw ConfigError(file.string() + ": duplicate document id \"" + doc.id + "\"");
    }
    doc.source_meta["origin"] = file.string();
    const std::string text = read_file(file);
    if (opts.pre_segmented) {
      std::istringstream lines(text);
      std::string line;
      while (std::getline(lines, line)) {
        Sentence sent = Sentence::from_text(line);
        if (!sent.tokens.empty()) doc.sentences.push_back(std::move(sent));
      }
    } else if (!collapse_whitespace(text).empty()) {
      doc.sentences = segment_sentences(text, opts.segmenter);
    }
    if (doc.sentences.empty()) {
      result.report.skipped.push_back({0, doc.id, "empty text"});
      continue;
    }
    result.corpus.documents.push_back(std::move(doc));
  }
  return result;
}

}  // namespace kblock
