#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "amava/session.hpp"

namespace amava::net {

struct GatewayOptions {
  std::string address = "127.0.0.1";
  std::uint16_t port = 0;  // 0 picks a free port
  int io_threads = 2;
  PipelineConfig pipeline;
};

// Called once per accepted hello; the gateway installs its own sink.
using DepsFactory = std::function<SessionDeps()>;

// WebSocket server speaking the JSON session protocol:
//   hello {client_version}            -> hello_ack {session_id, capture_hz}
//   frame {session_id, seq, captured_at_ms, jpeg_b64}
//   status                            -> status {session_id, frames, batches, dropped}
//   bye                               -> connection closed
//   server -> client: audio {session_id, batch_index, category, mime, audio_b64}
//                     caption {session_id, batch_index, category, text}
//                     error {code, message}
class Gateway {
 public:
  Gateway(GatewayOptions options, DepsFactory factory);
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  // Binds and starts serving; throws std::runtime_error if binding fails.
  void start();
  void stop();
  // Blocks until stop() is called (from another thread or a signal handler).
  void wait();

  std::uint16_t port() const;
  std::size_t active_sessions() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace amava::net
