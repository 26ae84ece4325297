// Copyright 2026 The vsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VSIM_SERVICE_H_
#define VSIM_SERVICE_H_

#include <cstddef>
#include <memory>
#include <string>

#include "vsim/pipeline.h"
#include "vsim/protocol.h"

namespace vsim {

inline constexpr const char* kVersion = "0.1.0";

struct ServiceConfig {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks a free port
  std::size_t max_frame_bytes = kDefaultMaxFrameBytes;
  // Unprocessed frames a session may queue; a newer frame evicts the oldest.
  std::size_t max_pending_frames = 2;
  double budget_us = kDefaultBudgetUs;
  int io_threads = 1;
  int worker_threads = 0;  // 0: one per hardware thread
};

// HTTP/1.1 + WebSocket endpoint:
//   GET  /healthz   {"status":"ok","version":...}
//   GET  /profiles  the five presets with descriptions and enabled filters
//   POST /simulate  image body -> simulated image body; profile from the
//                   X-Vsim-Profile header (JSON) or ?stage=N, plus optional
//                   ?fixation=x,y&t=s&seed=n
//   GET  /session   WebSocket: text control messages, binary frame messages
class Server {
 public:
  // Binds and listens. Throws IoError naming the address on failure.
  explicit Server(ServiceConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  unsigned short port() const;
  const ServiceConfig& config() const;

  // Serves until stop(). Blocks the calling thread.
  void run();
  // Thread safe. run() returns promptly; open connections are dropped and
  // queued frames discarded.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace vsim

#endif  // VSIM_SERVICE_H_
