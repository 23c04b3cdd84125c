#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "amava/session.hpp"

namespace amava::net {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : std::runtime_error("config " + key + ": " + what), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct BackendConfig {
  std::string backend = "mock";  // mock | live
  Millis timeout_ms = 0;
  Millis latency_ms = 0;         // mock only
  std::string script;            // interpreter mock script (JSON)
  std::string model;             // live model / voice model name
  std::string voice_id;          // live speech voice
};

struct ServerConfig {
  std::string address = "127.0.0.1";
  std::uint16_t port = 8765;
  std::string log_path;  // NDJSON event log; empty disables it
  std::string log_level = "info";
  int io_threads = 2;
  PipelineConfig pipeline;
  std::string model_path = "model.bin";
  BackendConfig interpreter{"mock", kDefaultInterpreterTimeoutMs, 0, "", "gemini-1.5-flash", ""};
  BackendConfig synth{"mock", kDefaultSynthTimeoutMs, 0, "", "eleven_turbo_v2", "21m00Tcm4TlvDq8Ikrwm"};
  std::string cache_dir = "audio-cache";
  std::size_t cache_max_entries = 0;

  // Throws ConfigError naming the first bad key.
  void validate() const;
};

// INI file, sections server/pipeline/policy/flow/model/interpreter/synth/cache.
// Unknown sections or keys are errors. Relative paths resolve against the
// directory of the file.
ServerConfig load_config(const std::string& path);
ServerConfig parse_config(const std::string& text, const std::string& base_dir = ".");

// Commented example with every key at its default.
std::string example_config();

}  // namespace amava::net
