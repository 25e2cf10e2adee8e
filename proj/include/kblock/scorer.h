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

// Document-level scorers consumed by the evaluation runner. A Scorer maps a
// whole document to a ScoreResult; all implementations are safe to call from
// several threads at once.

#ifndef KBLOCK_SCORER_H_
#define KBLOCK_SCORER_H_

#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "kblock/corpus.h"
#include "kblock/external.h"
#include "kblock/ngram.h"
#include "kblock/scoring.h"

namespace kblock {

class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual std::string name() const = 0;
  // request_id labels the call in errors and on the wire.
  virtual ScoreResult score(const Document& doc, const std::string& request_id) const = 0;
};

// Built-in n-gram scorer: sliding-window generative score over the
// document's n-gram stream (sentence tokens plus </s> markers).
class NgramScorer : public Scorer {
 public:
  NgramScorer(std::shared_ptr<const NgramModel> model, WindowConfig window = {});

  std::string name() const override;
  ScoreResult score(const Document& doc, const std::string& request_id) const override;

  const NgramModel& model() const { return *model_; }

 private:
  std::shared_ptr<const NgramModel> model_;
  WindowConfig window_;
};

// Scores through external providers. Each concurrent call checks out its own
// handle from a pool, so no handle ever carries two requests. Handles that
// break (timeout, closed stream) are dropped and replaced on demand; a
// provider-reported error leaves the handle usable.
class ExternalScorer : public Scorer {
 public:
  using HandleFactory = std::function<std::unique_ptr<ExternalScorerHandle>()>;

  // Opens and handshakes one handle up front so a bad provider or an
  // unsupported mode fails before any document is scored.
  ExternalScorer(HandleFactory factory, ScoreMode mode, std::string label = "external");

  static std::unique_ptr<ExternalScorer> spawn(const std::string& command, ScoreMode mode,
                                               HandleOptions opts = {});
  static std::unique_ptr<ExternalScorer> connect(const std::string& address, ScoreMode mode,
                                                 HandleOptions opts = {});

  std::string name() const override;
  ScoreResult score(const Document& doc, const std::string& request_id) const override;

  const ProviderInfo& info() const { return info_; }
  // Handles opened so far, including replacements for broken ones.
  std::size_t handles_opened() const;

 private:
  std::unique_ptr<ExternalScorerHandle> acquire() const;
  void release(std::unique_ptr<ExternalScorerHandle> handle) const;

  HandleFactory factory_;
  ScoreMode mode_;
  std::string label_;
  ProviderInfo info_;
  mutable std::mutex mu_;
  mutable std::vector<std::unique_ptr<ExternalScorerHandle>> idle_;
  mutable std::size_t opened_ = 0;
};

}  // namespace kblock

#endif  // KBLOCK_SCORER_H_
