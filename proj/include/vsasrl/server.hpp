// Copyright 2026 The vsasrl Authors
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

// WebSocket front end of a Session. One thread runs the network; one runs
// the simulation loop, paced to wall-clock time. They exchange commands and
// outgoing messages through queues only. Protocol: docs/protocol.md.

#ifndef VSASRL_SERVER_HPP
#define VSASRL_SERVER_HPP

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "vsasrl/config.hpp"

namespace vsasrl {

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 0;                // 0 picks a free port
  std::size_t max_queued_messages = 256;  // per client; oldest dropped beyond
  bool handle_signals = false;            // stop on SIGINT / SIGTERM
};

/// First message on every connection: protocol version and static layout.
nlohmann::json hello_message(const SimConfig& cfg);

class SessionServer {
 public:
  SessionServer(SimConfig cfg, ServerOptions options = {});
  ~SessionServer();
  SessionServer(const SessionServer&) = delete;
  SessionServer& operator=(const SessionServer&) = delete;

  /// Binds and starts both threads. Throws Error when the address cannot be
  /// bound.
  void start();
  /// Bound port, valid after start().
  unsigned short port() const;
  /// Idempotent; joins both threads.
  void stop();
  /// Blocks until stop() is called or, with handle_signals, a signal arrives.
  void wait();
  /// Blocks for at most `seconds`; true when the server stopped.
  bool wait_for(double seconds);

  std::uint64_t ticks() const;
  std::size_t clients() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace vsasrl

#endif  // VSASRL_SERVER_HPP
