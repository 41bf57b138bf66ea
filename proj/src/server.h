// Copyright 2026 The Coadapt Authors
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

#ifndef COADAPT_SERVER_H_
#define COADAPT_SERVER_H_

#include <cstdint>
#include <memory>
#include <string>

namespace coadapt {

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 0;  // 0 picks an ephemeral port
  std::string data_dir;     // session logs are written here when set
  // Clients advance the clock with {"type": "tick", "n": k} instead of the
  // wall-clock timer. Intended for scripted tests.
  bool manual_clock = false;
  uint64_t seed = 0;
};

// HTTP and WebSocket front end for live sessions. All sessions live on one
// I/O thread, so each session has a single writer.
//
//   POST /sessions            body: experiment config; returns {"id": ...}
//   GET  /sessions/{id}       session status
//   GET  /sessions/{id}/log   session log (newline-delimited JSON)
//   GET  /sessions/{id}/ws    WebSocket upgrade for the wire protocol
class Server {
 public:
  explicit Server(ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and serves on a background thread. Returns the bound port.
  unsigned short start();
  // Binds and serves on the calling thread until SIGINT or SIGTERM.
  void run_until_signal();
  void stop();
  unsigned short port() const;

  struct Impl;

 private:
  std::shared_ptr<Impl> impl_;
};

}  // namespace coadapt

#endif  // COADAPT_SERVER_H_
