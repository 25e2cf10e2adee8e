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

#include "kblock/config.h"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "kblock/error.h"

namespace kblock {
namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// "" is the empty list; an empty element anywhere else is an error.
std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto comma = s.find(',', start);
    if (comma == std::string_view::npos) comma = s.size();
    std::string item = trim(s.substr(start, comma - start));
    if (item.empty()) throw ConfigError("empty element in list \"" + std::string(s) + "\"");
    out.push_back(std::move(item));
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* want) {
  throw ConfigError("invalid value \"" + std::string(value) + "\" for " + std::string(key) +
                    " (expected " + want + ")");
}

template <typename T>
T parse_number(std::string_view key, std::string_view text, const char* want) {
  const std::string v = trim(text);
  T out{};
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    bad_value(key, text, want);
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view text) {
  const std::string v = trim(text);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, text, "true or false");
}

std::string one_of(std::string_view key, std::string_view text,
                   std::initializer_list<const char*> allowed) {
  const std::string v = trim(text);
  for (const char* a : allowed) {
    if (v == a) return v;
  }
  std::string want;
  for (const char* a : allowed) want += (want.empty() ? "" : " | ") + std::string(a);
  bad_value(key, text, want.c_str());
}

std::string json_as_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string out;
    for (const auto& e : v) out += (out.empty() ? "" : ",") + json_as_text(e);
    return out;
  }
  return v.dump();
}

void require_path(const std::string& key, const std::string& path) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) {
    throw ConfigError(key + ": path does not exist: " + path);
  }
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "corpus",        "corpus_format",   "pre_segmented", "domain",        "scorer",
      "order",         "smoothing",       "lambdas",       "train",         "train_format",
      "model",         "provider_cmd",    "provider_addr", "mode",          "timeout_seconds",
      "ks",            "seed",            "max_sentences", "window_tokens", "overlap_fraction",
      "workers",       "samples",         "fail_fast",     "output_prefix"};
  return keys;
}

std::vector<std::size_t> parse_ks(std::string_view s) {
  std::vector<std::size_t> ks;
  for (const auto& item : split_list(s)) {
    const auto k = parse_number<std::size_t>("ks", item, "positive integers");
    if (k == 0) throw ConfigError("block size must be positive");
    ks.push_back(k);
  }
  if (ks.empty()) throw ConfigError("ks: no block sizes given");
  return ks;
}

void apply_setting(RunConfig& cfg, std::string_view key_in, std::string_view value) {
  std::string key(key_in);
  for (char& c : key) {
    if (c == '-') c = '_';
  }
  const std::string v = trim(value);
  if (key == "corpus") {
    cfg.corpus = v;
  } else if (key == "corpus_format") {
    cfg.corpus_format = one_of(key, v, {"auto", "jsonl", "text"});
  } else if (key == "pre_segmented") {
    cfg.pre_segmented = parse_bool(key, v);
  } else if (key == "domain") {
    cfg.domain = v;
  } else if (key == "scorer") {
    cfg.scorer = one_of(key, v, {"ngram", "external"});
  } else if (key == "order") {
    cfg.order = parse_number<int>(key, v, "an integer");
  } else if (key == "smoothing") {
    cfg.smoothing = one_of(key, v, {"witten_bell", "fixed"});
  } else if (key == "lambdas") {
    cfg.lambdas.clear();
    for (const auto& item : split_list(v)) {
      cfg.lambdas.push_back(parse_number<double>(key, item, "real numbers"));
    }
  } else if (key == "train") {
    cfg.train = v;
  } else if (key == "train_format") {
    cfg.train_format = one_of(key, v, {"auto", "jsonl", "text"});
  } else if (key == "model") {
    cfg.model = v;
  } else if (key == "provider_cmd") {
    cfg.provider_cmd = v;
  } else if (key == "provider_addr") {
    cfg.provider_addr = v;
  } else if (key == "mode") {
    cfg.mode = one_of(key, v, {"generative", "mlm"});
  } else if (key == "timeout_seconds") {
    cfg.timeout_seconds = parse_number<double>(key, v, "seconds");
  } else if (key == "ks") {
    cfg.ks = parse_ks(v);
  } else if (key == "seed") {
    if (v.empty() || v == "null") {
      cfg.seed.reset();
    } else {
      cfg.seed = parse_number<std::uint64_t>(key, v, "an unsigned 64-bit integer");
    }
  } else if (key == "max_sentences") {
    cfg.max_sentences = parse_number<std::size_t>(key, v, "a positive integer");
  } else if (key == "window_tokens") {
    cfg.window_tokens = parse_number<std::size_t>(key, v, "a positive integer");
  } else if (key == "overlap_fraction") {
    cfg.overlap_fraction = parse_number<double>(key, v, "a fraction in (0, 1)");
  } else if (key == "workers") {
    cfg.workers = parse_number<std::size_t>(key, v, "a non-negative integer");
  } else if (key == "samples") {
    cfg.samples = parse_number<std::size_t>(key, v, "a positive integer");
  } else if (key == "fail_fast") {
    cfg.fail_fast = parse_bool(key, v);
  } else if (key == "output_prefix") {
    cfg.output_prefix = v;
  } else {
    throw ConfigError("unknown configuration key \"" + std::string(key_in) + "\"");
  }
}

RunConfig parse_config_text(std::string_view text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    }
    try {
      apply_setting(cfg, trim(std::string_view(line).substr(0, eq)),
                    std::string_view(line).substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
    if (j.contains("config_snapshot")) j = j["config_snapshot"];
    return config_from_json(j);
  }
  return parse_config_text(text, path.string());
}

json config_to_json(const RunConfig& cfg) {
  return {{"corpus", cfg.corpus},
          {"corpus_format", cfg.corpus_format},
          {"pre_segmented", cfg.pre_segmented},
          {"domain", cfg.domain},
          {"scorer", cfg.scorer},
          {"order", cfg.order},
          {"smoothing", cfg.smoothing},
          {"lambdas", cfg.lambdas},
          {"train", cfg.train},
          {"train_format", cfg.train_format},
          {"model", cfg.model},
          {"provider_cmd", cfg.provider_cmd},
          {"provider_addr", cfg.provider_addr},
          {"mode", cfg.mode},
          {"timeout_seconds", cfg.timeout_seconds},
          {"ks", cfg.ks},
          {"seed", cfg.seed ? json(*cfg.seed) : json(nullptr)},
          {"max_sentences", cfg.max_sentences},
          {"window_tokens", cfg.window_tokens},
          {"overlap_fraction", cfg.overlap_fraction},
          {"workers", cfg.workers},
          {"samples", cfg.samples},
          {"fail_fast", cfg.fail_fast},
          {"output_prefix", cfg.output_prefix}};
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("configuration snapshot must be a JSON object");
  RunConfig cfg;
  for (const auto& [key, value] : j.items()) apply_setting(cfg, key, json_as_text(value));
  return cfg;
}

std::uint64_t resolve_seed(const RunConfig& cfg) {
  if (cfg.seed) return *cfg.seed;
  if (const char* env = std::getenv("KBLOCK_SEED"); env != nullptr && *env != '\0') {
    return parse_number<std::uint64_t>("KBLOCK_SEED", env, "an unsigned 64-bit integer");
  }
  return kDefaultRunSeed;
}

std::string resolve_format(const std::string& format, const std::string& path) {
  if (format == "jsonl" || format == "text") return format;
  if (format != "auto") {
    throw ConfigError("unknown corpus format \"" + format + "\" (expected auto, jsonl or text)");
  }
  const std::string ext = std::filesystem::path(path).extension().string();
  return ext == ".jsonl" || ext == ".json" || ext == ".ndjson" ? "jsonl" : "text";
}

void validate(const RunConfig& cfg) {
  if (cfg.corpus.empty()) throw ConfigError("corpus: no corpus path given");
  require_path("corpus", cfg.corpus);
  if (cfg.max_sentences == 0) throw ConfigError("max_sentences must be positive");
  if (cfg.samples == 0) throw ConfigError("samples must be positive");
  if (cfg.window_tokens == 0) throw ConfigError("window_tokens must be positive");
  if (!(cfg.overlap_fraction > 0.0 && cfg.overlap_fraction < 1.0)) {
    throw ConfigError("overlap_fraction must lie in (0, 1)");
  }
  if (std::floor(static_cast<double>(cfg.window_tokens) * (1.0 - cfg.overlap_fraction)) < 1) {
    throw ConfigError("window stride must be at least one token");
  }
  if (cfg.ks.empty()) throw ConfigError("ks: no block sizes given");
  if (cfg.scorer == "ngram") {
    if (cfg.model.empty() && cfg.train.empty()) {
      throw ConfigError("ngram scorer needs train or model");
    }
    if (!cfg.model.empty() && !cfg.train.empty()) {
      throw ConfigError("give either train or model, not both");
    }
    if (!cfg.model.empty()) require_path("model", cfg.model);
    if (!cfg.train.empty()) require_path("train", cfg.train);
    if (cfg.order < 1) throw ConfigError("n-gram order must be >= 1");
    if (cfg.smoothing == "fixed" &&
        cfg.lambdas.size() != static_cast<std::size_t>(cfg.order)) {
      throw ConfigError("fixed smoothing needs one lambda per order");
    }
  } else {
    if (cfg.provider_cmd.empty() == cfg.provider_addr.empty()) {
      throw ConfigError("external scorer needs exactly one of provider_cmd or provider_addr");
    }
    if (!(cfg.timeout_seconds > 0.0)) throw ConfigError("timeout_seconds must be positive");
  }
}

}  // namespace kblock
