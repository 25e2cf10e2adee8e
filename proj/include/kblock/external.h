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

// Client half of the external scorer protocol: newline-delimited JSON over a
// provider subprocess's stdin/stdout or over a TCP stream.
//
//   -> {"type":"hello","protocol":1}
//   <- {"type":"hello","protocol":1,"modes":["generative","mlm"],"max_tokens":512}
//   -> {"type":"score","id":"d1","mode":"generative","sentences":["..", ".."]}
//   <- {"type":"result","id":"d1","score":-3.27,"token_count":188}
//   <- {"type":"error","id":"d1","message":"..."}
//
// "score" is the provider's per-token mean log-likelihood; the harness treats
// it as an opaque real and rejects anything non-finite.

#ifndef KBLOCK_EXTERNAL_H_
#define KBLOCK_EXTERNAL_H_

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "kblock/scoring.h"

namespace kblock {

inline constexpr int kProtocolVersion = 1;

enum class ScoreMode { kGenerative, kMlm };

std::string to_string(ScoreMode mode);
ScoreMode parse_score_mode(std::string_view s);

struct ProviderInfo {
  int protocol = 0;
  std::vector<std::string> modes;
  std::size_t max_tokens = 0;

  bool supports(ScoreMode mode) const;
};

namespace wire {

std::string hello_request();
// Throws ProviderError("", ...) unless the reply is a protocol-1 hello with a
// non-empty mode list. An error object yields its message.
ProviderInfo parse_hello(std::string_view line);

std::string score_request(std::string_view id, ScoreMode mode,
                          const std::vector<std::string>& sentences);

// Response id, or "" when the line carries none. Throws on non-JSON.
std::string response_id(std::string_view line);

// Parses a response already matched to expected_id. Error objects,
// missing/ill-typed fields, non-finite scores and token_count < 1 raise
// ProviderError(expected_id, ...).
ScoreResult parse_score_response(std::string_view line, std::string_view expected_id);

}  // namespace wire

// A bidirectional line stream.
class LineTransport {
 public:
  virtual ~LineTransport() = default;
  virtual void write_line(std::string_view line) = 0;
  // Next line without its '\n'. Throws ProviderError on EOF or timeout.
  virtual std::string read_line(std::chrono::milliseconds timeout) = 0;
};

// Runs `/bin/sh -c command` with its stdin/stdout piped to us; stderr is
// inherited. The child is reaped on destruction.
std::unique_ptr<LineTransport> spawn_transport(const std::string& command);

// "host:port".
std::unique_ptr<LineTransport> tcp_transport(const std::string& address);

struct HandleOptions {
  std::chrono::milliseconds timeout{120'000};  // per request
};

// One connection to a provider. Never carries more than one request at a
// time; not thread-safe (the evaluation layer gives each worker its own).
class ExternalScorerHandle {
 public:
  ExternalScorerHandle(std::unique_ptr<LineTransport> transport, HandleOptions opts = {});

  static ExternalScorerHandle spawn(const std::string& command, HandleOptions opts = {});
  static ExternalScorerHandle connect(const std::string& address, HandleOptions opts = {});

  const ProviderInfo& handshake();
  bool connected() const { return info_.protocol != 0; }
  const ProviderInfo& info() const { return info_; }

  // After a timeout or a closed stream the handle is unusable.
  bool broken() const { return broken_; }

  ScoreResult score(const std::string& id, ScoreMode mode,
                    const std::vector<std::string>& sentences);

 private:
  std::unique_ptr<LineTransport> transport_;
  HandleOptions opts_;
  ProviderInfo info_;
  bool broken_ = false;
};

// Sends one score request for the given sentences and returns the provider's
// score and token count verbatim.
ScoreResult external_score(const std::vector<std::string>& sentences,
                           ExternalScorerHandle& handle, ScoreMode mode,
                           const std::string& request_id);

}  // namespace kblock

#endif  // KBLOCK_EXTERNAL_H_
