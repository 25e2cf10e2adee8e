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

#ifndef KBLOCK_ERROR_H_
#define KBLOCK_ERROR_H_

#include <stdexcept>
#include <string>
#include <utility>

namespace kblock {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user configuration or malformed input files. The CLI maps this to
// exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Failure talking to an external scorer. Carries the request id that was in
// flight ("" for the handshake).
class ProviderError : public Error {
 public:
  ProviderError(std::string request_id, const std::string& what)
      : Error(request_id.empty() ? what
                                 : "request " + request_id + ": " + what),
        request_id_(std::move(request_id)) {}

  const std::string& request_id() const { return request_id_; }

 private:
  std::string request_id_;
};

}  // namespace kblock

#endif  // KBLOCK_ERROR_H_
