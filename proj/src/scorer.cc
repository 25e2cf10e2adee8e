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

#include "kblock/scorer.h"

#include "kblock/error.h"

namespace kblock {

NgramScorer::NgramScorer(std::shared_ptr<const NgramModel> model, WindowConfig window)
    : model_(std::move(model)), window_(window) {
  if (!model_) throw Error("n-gram scorer needs a model");
  window_.validate();
}

std::string NgramScorer::name() const {
  return "ngram-" + std::to_string(model_->order()) + "-" + model_->smoothing().method_name();
}

ScoreResult NgramScorer::score(const Document& doc, const std::string& /*request_id*/) const {
  const std::vector<Token> stream = ngram_stream(doc);
  ScoreResult out = sliding_window_score(stream, *model_, window_);
  out.doc_id = doc.id;
  return out;
}

ExternalScorer::ExternalScorer(HandleFactory factory, ScoreMode mode, std::string label)
    : factory_(std::move(factory)), mode_(mode), label_(std::move(label)) {
  auto first = acquire();
  info_ = first->info();
  if (!info_.supports(mode_)) {
    throw ConfigError("provider does not support mode \"" + to_string(mode_) + "\"");
  }
  release(std::move(first));
}

std::unique_ptr<ExternalScorer> ExternalScorer::spawn(const std::string& command,
                                                      ScoreMode mode, HandleOptions opts) {
  return std::make_unique<ExternalScorer>(
      [command, opts] {
        return std::make_unique<ExternalScorerHandle>(spawn_transport(command), opts);
      },
      mode);
}

std::unique_ptr<ExternalScorer> ExternalScorer::connect(const std::string& address,
                                                        ScoreMode mode, HandleOptions opts) {
  return std::make_unique<ExternalScorer>(
      [address, opts] {
        return std::make_unique<ExternalScorerHandle>(tcp_transport(address), opts);
      },
      mode);
}

std::string ExternalScorer::name() const { return label_ + "-" + to_string(mode_); }

std::size_t ExternalScorer::handles_opened() const {
  std::lock_guard lock(mu_);
  return opened_;
}

std::unique_ptr<ExternalScorerHandle> ExternalScorer::acquire() const {
  {
    std::lock_guard lock(mu_);
    if (!idle_.empty()) {
      auto h = std::move(idle_.back());
      idle_.pop_back();
      return h;
    }
    ++opened_;
  }
  auto h = factory_();
  h->handshake();
  return h;
}

void ExternalScorer::release(std::unique_ptr<ExternalScorerHandle> handle) const {
  if (handle->broken()) return;
  std::lock_guard lock(mu_);
  idle_.push_back(std::move(handle));
}

ScoreResult ExternalScorer::score(const Document& doc, const std::string& request_id) const {
  std::vector<std::string> sentences;
  sentences.reserve(doc.sentences.size());
  for (const auto& s : doc.sentences) sentences.push_back(s.text);
  const std::string id = request_id.empty() ? doc.id : request_id;

  std::unique_ptr<ExternalScorerHandle> handle;
  try {
    handle = acquire();
  } catch (const ProviderError& e) {
    throw ProviderError(id, e.what());
  }
  try {
    ScoreResult out = external_score(sentences, *handle, mode_, id);
    out.doc_id = doc.id;
    release(std::move(handle));
    return out;
  } catch (...) {
    release(std::move(handle));
    throw;
  }
}

}  // namespace kblock
