#pragma once

#include <memory>

#include "amava/net/config.hpp"
#include "amava/net/gateway.hpp"

namespace amava::net {

// Everything sessions share: model, backends, cache, event log, clock.
// Construction fails (before any port is bound) if a file or key is missing.
struct Components {
  std::shared_ptr<const MotionModel> model;
  std::shared_ptr<InterpreterBackend> interpreter;
  std::shared_ptr<SynthBackend> synth;
  std::shared_ptr<AudioCache> cache;
  std::shared_ptr<EventLog> log;
  std::shared_ptr<Clock> clock;
  std::shared_ptr<Executor> background;

  static Components from_config(const ServerConfig& cfg, std::shared_ptr<Clock> clock = nullptr);
  DepsFactory factory() const;
};

GatewayOptions gateway_options(const ServerConfig& cfg);

// Serves until SIGINT or SIGTERM. Returns the process exit code.
int serve(const ServerConfig& cfg);

}  // namespace amava::net
