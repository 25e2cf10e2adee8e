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

#include "kblock/external.h"

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <thread>

#include <json.hpp>

#include "kblock/error.h"

namespace kblock {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

json parse_object(std::string_view line, const std::string& id) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error&) {
    throw ProviderError(id, "malformed response (not JSON)");
  }
  if (!j.is_object()) throw ProviderError(id, "malformed response (not an object)");
  return j;
}

// True when a non-finite literal (NaN, Infinity) appears outside any string.
// Such lines are not JSON, but they are what many serializers emit for a
// non-finite float, and deserve a clearer error than a parse failure.
bool has_nonfinite_literal(std::string_view line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
    } else if (c == '"') {
      in_string = true;
    } else if (line.substr(i, 3) == "NaN" || line.substr(i, 8) == "Infinity") {
      return true;
    }
  }
  return false;
}

std::string type_of(const json& j) {
  auto it = j.find("type");
  return it != j.end() && it->is_string() ? it->get<std::string>() : "";
}

// Line reader/writer over raw file descriptors.
class FdTransport : public LineTransport {
 public:
  FdTransport(int read_fd, int write_fd, bool socket)
      : read_fd_(read_fd), write_fd_(write_fd), socket_(socket) {}

  ~FdTransport() override { close_fds(); }

  void write_line(std::string_view line) override {
    std::string data(line);
    data += '\n';
    std::size_t off = 0;
    while (off < data.size()) {
      ssize_t n = socket_ ? ::send(write_fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL)
                          : ::write(write_fd_, data.data() + off, data.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ProviderError("", std::string("write to provider failed: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::string read_line(std::chrono::milliseconds timeout) override {
    const auto deadline = Clock::now() + timeout;
    for (;;) {
      if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
      if (left.count() <= 0) throw ProviderError("", "timed out waiting for provider");
      pollfd pfd{read_fd_, POLLIN, 0};
      const int rc = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(left.count(), 1 << 30)));
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw ProviderError("", std::string("poll failed: ") + std::strerror(errno));
      }
      if (rc == 0) continue;
      char chunk[4096];
      const ssize_t n = ::read(read_fd_, chunk, sizeof(chunk));
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        throw ProviderError("", std::string("read from provider failed: ") + std::strerror(errno));
      }
      if (n == 0) throw ProviderError("", "provider closed the stream");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 protected:
  void close_fds() {
    if (read_fd_ >= 0) ::close(read_fd_);
    if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
    read_fd_ = write_fd_ = -1;
  }

 private:
  int read_fd_;
  int write_fd_;
  bool socket_;
  std::string buffer_;
};

class ProcessTransport : public FdTransport {
 public:
  ProcessTransport(pid_t pid, int read_fd, int write_fd)
      : FdTransport(read_fd, write_fd, false), pid_(pid) {}

  ~ProcessTransport() override {
    close_fds();  // EOF on the provider's stdin asks it to exit
    bool reaped = false;
    for (int i = 0; i < 200 && !reaped; ++i) {
      reaped = ::waitpid(pid_, nullptr, WNOHANG) != 0;
      if (!reaped) std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    // Also catches grandchildren left behind by the shell.
    ::kill(-pid_, SIGKILL);
    if (!reaped) ::waitpid(pid_, nullptr, 0);
  }

 private:
  pid_t pid_;
};

}  // namespace

std::string to_string(ScoreMode mode) {
  return mode == ScoreMode::kGenerative ? "generative" : "mlm";
}

ScoreMode parse_score_mode(std::string_view s) {
  if (s == "generative") return ScoreMode::kGenerative;
  if (s == "mlm") return ScoreMode::kMlm;
  throw ConfigError("unknown scoring mode \"" + std::string(s) + "\" (expected generative or mlm)");
}

bool ProviderInfo::supports(ScoreMode mode) const {
  return std::find(modes.begin(), modes.end(), to_string(mode)) != modes.end();
}

namespace wire {

std::string hello_request() {
  return json{{"type", "hello"}, {"protocol", kProtocolVersion}}.dump();
}

ProviderInfo parse_hello(std::string_view line) {
  const json j = parse_object(line, "");
  const std::string type = type_of(j);
  if (type == "error") {
    auto msg = j.find("message");
    throw ProviderError("", "provider refused handshake: " +
                                (msg != j.end() && msg->is_string() ? msg->get<std::string>()
                                                                    : std::string("(no message)")));
  }
  if (type != "hello") throw ProviderError("", "expected hello reply");
  ProviderInfo info;
  auto proto = j.find("protocol");
  if (proto == j.end() || !proto->is_number_integer()) {
    throw ProviderError("", "hello reply lacks integer \"protocol\"");
  }
  info.protocol = proto->get<int>();
  if (info.protocol != kProtocolVersion) {
    throw ProviderError("", "unsupported protocol version " + std::to_string(info.protocol));
  }
  auto modes = j.find("modes");
  if (modes == j.end() || !modes->is_array() || modes->empty()) {
    throw ProviderError("", "hello reply lacks a non-empty \"modes\" list");
  }
  for (const auto& m : *modes) {
    if (!m.is_string()) throw ProviderError("", "hello \"modes\" must hold strings");
    info.modes.push_back(m.get<std::string>());
  }
  auto max_tokens = j.find("max_tokens");
  if (max_tokens != j.end()) {
    if (!max_tokens->is_number_unsigned() || max_tokens->get<std::size_t>() == 0) {
      throw ProviderError("", "hello \"max_tokens\" must be a positive integer");
    }
    info.max_tokens = max_tokens->get<std::size_t>();
  }
  return info;
}

std::string score_request(std::string_view id, ScoreMode mode,
                          const std::vector<std::string>& sentences) {
  return json{{"type", "score"},
              {"id", std::string(id)},
              {"mode", to_string(mode)},
              {"sentences", sentences}}
      .dump();
}

std::string response_id(std::string_view line) {
  const json j = parse_object(line, "");
  auto it = j.find("id");
  return it != j.end() && it->is_string() ? it->get<std::string>() : "";
}

ScoreResult parse_score_response(std::string_view line, std::string_view expected_id) {
  const std::string id(expected_id);
  if (has_nonfinite_literal(line)) throw ProviderError(id, "non-finite score");
  const json j = parse_object(line, id);
  auto got = j.find("id");
  if (got == j.end() || !got->is_string() || got->get<std::string>() != id) {
    throw ProviderError(id, "response id does not match request");
  }
  const std::string type = type_of(j);
  if (type == "error") {
    auto msg = j.find("message");
    throw ProviderError(id, "provider error: " + (msg != j.end() && msg->is_string()
                                                      ? msg->get<std::string>()
                                                      : std::string("(no message)")));
  }
  if (type != "result") throw ProviderError(id, "malformed response (unexpected type)");

  auto score = j.find("score");
  if (score == j.end()) throw ProviderError(id, "malformed response (missing \"score\")");
  // Providers that cannot write NaN as a number send it as a string or null.
  if (score->is_null() || score->is_string()) throw ProviderError(id, "non-finite score");
  if (!score->is_number()) throw ProviderError(id, "malformed response (\"score\" not a number)");
  const double value = score->get<double>();
  if (!std::isfinite(value)) throw ProviderError(id, "non-finite score");

  auto count = j.find("token_count");
  if (count == j.end() || !count->is_number_integer()) {
    throw ProviderError(id, "malformed response (missing integer \"token_count\")");
  }
  if (count->get<long long>() < 1) throw ProviderError(id, "token_count must be positive");

  ScoreResult out;
  out.score = value;
  out.token_count = count->get<std::size_t>();
  return out;
}

}  // namespace wire

std::unique_ptr<LineTransport> spawn_transport(const std::string& command) {
  // A provider that dies mid-write must surface as an error, not kill us.
  ::signal(SIGPIPE, SIG_IGN);

  int to_child[2];
  int from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0) throw ProviderError("", "pipe failed");
  if (::pipe2(from_child, O_CLOEXEC) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw ProviderError("", "pipe failed");
  }
  const pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
    throw ProviderError("", "fork failed");
  }
  if (pid == 0) {
    ::setpgid(0, 0);  // lets the destructor kill whatever the shell starts
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  return std::make_unique<ProcessTransport>(pid, from_child[0], to_child[1]);
}

std::unique_ptr<LineTransport> tcp_transport(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == address.size()) {
    throw ConfigError("provider address must be host:port, got \"" + address + "\"");
  }
  const std::string host = address.substr(0, colon);
  const std::string port = address.substr(colon + 1);

  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    throw ProviderError("", "cannot resolve " + address + ": " + ::gai_strerror(rc));
  }
  int fd = -1;
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw ProviderError("", "cannot connect to " + address);
  return std::make_unique<FdTransport>(fd, fd, true);
}

ExternalScorerHandle::ExternalScorerHandle(std::unique_ptr<LineTransport> transport,
                                           HandleOptions opts)
    : transport_(std::move(transport)), opts_(opts) {}

ExternalScorerHandle ExternalScorerHandle::spawn(const std::string& command, HandleOptions opts) {
  return ExternalScorerHandle(spawn_transport(command), opts);
}

ExternalScorerHandle ExternalScorerHandle::connect(const std::string& address,
                                                   HandleOptions opts) {
  return ExternalScorerHandle(tcp_transport(address), opts);
}

const ProviderInfo& ExternalScorerHandle::handshake() {
  try {
    transport_->write_line(wire::hello_request());
    info_ = wire::parse_hello(transport_->read_line(opts_.timeout));
  } catch (const ProviderError&) {
    broken_ = true;
    throw;
  }
  return info_;
}

ScoreResult ExternalScorerHandle::score(const std::string& id, ScoreMode mode,
                                        const std::vector<std::string>& sentences) {
  if (broken_) throw ProviderError(id, "provider connection is broken");
  if (!connected()) throw ProviderError(id, "handshake not completed");
  std::string line;
  try {
    transport_->write_line(wire::score_request(id, mode, sentences));
    line = transport_->read_line(opts_.timeout);
  } catch (const ProviderError& e) {
    broken_ = true;
    throw ProviderError(id, e.what());
  }
  return wire::parse_score_response(line, id);
}

ScoreResult external_score(const std::vector<std::string>& sentences,
                           ExternalScorerHandle& handle, ScoreMode mode,
                           const std::string& request_id) {
  return handle.score(request_id, mode, sentences);
}

}  // namespace kblock
