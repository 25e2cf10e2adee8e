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

#include <gtest/gtest.h>

#include <cstdlib>

#include "kblock/error.h"
#include "support/temp_dir.h"

namespace kblock {
namespace {

using testing::TempDir;

struct SeedEnv {
  explicit SeedEnv(const char* v) {
    if (v) {
      ::setenv("KBLOCK_SEED", v, 1);
    } else {
      ::unsetenv("KBLOCK_SEED");
    }
  }
  ~SeedEnv() { ::unsetenv("KBLOCK_SEED"); }
};

TEST(ConfigTest, Defaults) {
  const RunConfig c;
  EXPECT_EQ(c.ks, (std::vector<std::size_t>{1, 2, 3, 4, 5}));
  EXPECT_EQ(c.max_sentences, 20u);
  EXPECT_EQ(c.window_tokens, 512u);
  EXPECT_EQ(c.overlap_fraction, 0.5);
  EXPECT_EQ(c.order, 3);
  EXPECT_EQ(c.smoothing, "witten_bell");
  EXPECT_EQ(c.timeout_seconds, 120.0);
}

TEST(ConfigTest, ParseText) {
  const RunConfig c = parse_config_text(
      "# run\n"
      "corpus = data/x.jsonl\n"
      "ks = 1, 3,5   # odd only\n"
      "\n"
      "seed=7\n"
      "fail-fast = true\n"
      "lambdas = 0.2,0.5,0.8\n"
      "overlap_fraction = 0.25\n");
  EXPECT_EQ(c.corpus, "data/x.jsonl");
  EXPECT_EQ(c.ks, (std::vector<std::size_t>{1, 3, 5}));
  EXPECT_EQ(c.seed, 7u);
  EXPECT_TRUE(c.fail_fast);
  EXPECT_EQ(c.lambdas, (std::vector<double>{0.2, 0.5, 0.8}));
  EXPECT_EQ(c.overlap_fraction, 0.25);
}

TEST(ConfigTest, RejectsBadInput) {
  EXPECT_THROW(parse_config_text("corpus\n"), ConfigError);
  try {
    parse_config_text("colour = red\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("unknown configuration key \"colour\""),
              std::string::npos);
  }
  RunConfig c;
  EXPECT_THROW(apply_setting(c, "order", "three"), ConfigError);
  EXPECT_THROW(apply_setting(c, "max_sentences", "-4"), ConfigError);
  EXPECT_THROW(apply_setting(c, "fail_fast", "maybe"), ConfigError);
  EXPECT_THROW(apply_setting(c, "ks", "1,0"), ConfigError);
  EXPECT_THROW(apply_setting(c, "ks", ""), ConfigError);
  EXPECT_THROW(apply_setting(c, "seed", "1.5"), ConfigError);
}

TEST(ConfigTest, ParseKs) {
  EXPECT_EQ(parse_ks("2"), (std::vector<std::size_t>{2}));
  EXPECT_EQ(parse_ks("1,2 , 10"), (std::vector<std::size_t>{1, 2, 10}));
  EXPECT_THROW(parse_ks("1,,2"), ConfigError);
}

TEST(ConfigTest, JsonRoundTrip) {
  RunConfig c;
  c.corpus = "c.jsonl";
  c.seed = 99;
  c.ks = {2, 4};
  c.lambdas = {0.1, 0.2, 0.3};
  c.scorer = "external";
  c.provider_cmd = "python3 serve.py";
  EXPECT_EQ(config_from_json(config_to_json(c)), c);
  RunConfig unseeded;
  EXPECT_EQ(config_from_json(config_to_json(unseeded)), unseeded);
  EXPECT_THROW(config_from_json(nlohmann::json::array()), ConfigError);
}

TEST(ConfigTest, LoadFromFiles) {
  TempDir dir;
  const auto text = dir.write("run.cfg", "corpus = a.jsonl\nseed = 3\n");
  EXPECT_EQ(load_config(text).seed, 3u);

  RunConfig c;
  c.corpus = "b.jsonl";
  c.seed = 11;
  const auto snap = dir.write("snap.json", config_to_json(c).dump());
  EXPECT_EQ(load_config(snap), c);
  const nlohmann::json report = {{"format", "kblock-report"},
                                 {"config_snapshot", config_to_json(c)}};
  EXPECT_EQ(load_config(dir.write("r.report.json", report.dump())), c);
  EXPECT_THROW(load_config(dir / "missing.cfg"), ConfigError);
}

TEST(ConfigTest, SeedResolution) {
  RunConfig c;
  {
    SeedEnv env(nullptr);
    EXPECT_EQ(resolve_seed(c), kDefaultRunSeed);
  }
  {
    SeedEnv env("1234");
    EXPECT_EQ(resolve_seed(c), 1234u);
    c.seed = 5;
    EXPECT_EQ(resolve_seed(c), 5u);
    c.seed.reset();
  }
  {
    SeedEnv env("abc");
    EXPECT_THROW(resolve_seed(c), ConfigError);
  }
}

TEST(ConfigTest, ResolveFormat) {
  EXPECT_EQ(resolve_format("auto", "x.jsonl"), "jsonl");
  EXPECT_EQ(resolve_format("auto", "x.ndjson"), "jsonl");
  EXPECT_EQ(resolve_format("auto", "x.json"), "jsonl");
  EXPECT_EQ(resolve_format("auto", "x.txt"), "text");
  EXPECT_EQ(resolve_format("auto", "some/dir"), "text");
  EXPECT_EQ(resolve_format("text", "x.jsonl"), "text");
  EXPECT_THROW(resolve_format("xml", "x"), ConfigError);
}

TEST(ConfigTest, Validate) {
  TempDir dir;
  const std::string corpus = dir.write("c.jsonl", "{}\n").string();
  const std::string train = dir.write("t.jsonl", "{}\n").string();
  RunConfig c;
  EXPECT_THROW(validate(c), ConfigError);
  c.corpus = corpus;
  EXPECT_THROW(validate(c), ConfigError);  // no train or model
  c.train = train;
  EXPECT_NO_THROW(validate(c));

  RunConfig missing = c;
  missing.corpus = (dir / "nope.jsonl").string();
  try {
    validate(missing);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(std::string(e.what()), "corpus: path does not exist: " + missing.corpus);
  }

  RunConfig bad = c;
  bad.overlap_fraction = 1.0;
  EXPECT_THROW(validate(bad), ConfigError);
  bad = c;
  bad.smoothing = "fixed";
  bad.lambdas = {0.5};
  EXPECT_THROW(validate(bad), ConfigError);
  bad.lambdas = {0.5, 0.5, 0.5};
  EXPECT_NO_THROW(validate(bad));
  bad = c;
  bad.scorer = "external";
  EXPECT_THROW(validate(bad), ConfigError);
  bad.provider_cmd = "serve";
  EXPECT_NO_THROW(validate(bad));
  bad.provider_addr = "localhost:1";
  EXPECT_THROW(validate(bad), ConfigError);
}

}  // namespace
}  // namespace kblock
