#include "amava/net/server.hpp"

#include <csignal>
#include <filesystem>

#include <boost/asio/io_context.hpp>
#include <boost/asio/signal_set.hpp>
#include <spdlog/spdlog.h>

#include "amava/model_io.hpp"
#include "amava/net/live.hpp"

namespace amava::net {

Components Components::from_config(const ServerConfig& cfg, std::shared_ptr<Clock> clock) {
  cfg.validate();
  Components c;
  c.clock = clock ? std::move(clock) : std::make_shared<SteadyClock>();
  try {
    c.model = std::make_shared<const MotionModel>(load_model(cfg.model_path));
  } catch (const std::exception& e) {
    throw ConfigError("model.path", e.what());
  }
  if (cfg.interpreter.backend == "live") {
    c.interpreter = GeminiInterpreter::from_env(cfg.interpreter.model, cfg.interpreter.timeout_ms);
  } else {
    try {
      c.interpreter = MockInterpreter::from_json_file(cfg.interpreter.script, c.clock);
    } catch (const std::exception& e) {
      throw ConfigError("interpreter.script", e.what());
    }
  }
  if (cfg.synth.backend == "live") {
    c.synth = ElevenLabsSynth::from_env(cfg.synth.model, cfg.synth.voice_id, cfg.synth.timeout_ms);
  } else {
    c.synth = std::make_shared<MockSynth>(c.clock, cfg.synth.latency_ms, cfg.synth.timeout_ms);
  }
  try {
    c.cache = std::make_shared<AudioCache>(cfg.cache_dir, cfg.cache_max_entries);
  } catch (const std::exception& e) {
    throw ConfigError("cache.dir", e.what());
  }
  if (cfg.log_path.empty()) {
    c.log = std::make_shared<NullEventLog>();
  } else {
    try {
      c.log = std::make_shared<FileEventLog>(cfg.log_path);
    } catch (const std::exception& e) {
      throw ConfigError("server.log_path", e.what());
    }
  }
  c.background = std::make_shared<BackgroundExecutor>();
  return c;
}

DepsFactory Components::factory() const {
  return [c = *this] {
    SessionDeps d;
    d.model = c.model;
    d.interpreter = c.interpreter;
    d.synth = c.synth;
    d.cache = c.cache;
    d.log = c.log;
    d.clock = c.clock;
    d.background = c.background;
    return d;
  };
}

GatewayOptions gateway_options(const ServerConfig& cfg) {
  GatewayOptions o;
  o.address = cfg.address;
  o.port = cfg.port;
  o.io_threads = cfg.io_threads;
  o.pipeline = cfg.pipeline;
  return o;
}

int serve(const ServerConfig& cfg) {
  spdlog::set_level(spdlog::level::from_str(cfg.log_level));
  const Components components = Components::from_config(cfg);
  Gateway gateway(gateway_options(cfg), components.factory());
  gateway.start();

  boost::asio::io_context signals_ctx;
  boost::asio::signal_set signals(signals_ctx, SIGINT, SIGTERM);
  signals.async_wait([&](const boost::system::error_code&, int sig) {
    spdlog::info("signal {}, shutting down", sig);
    gateway.stop();
  });
  signals_ctx.run();
  components.log->flush();
  return 0;
}

}  // namespace amava::net
