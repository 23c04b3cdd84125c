#include "amava/net/config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace amava::net {

namespace pt = boost::property_tree;
namespace fs = std::filesystem;

namespace {

const std::map<std::string, std::set<std::string>> kSchema = {
    {"server", {"address", "port", "log_path", "log_level", "io_threads"}},
    {"pipeline", {"batch_size", "capture_hz", "max_in_flight"}},
    {"policy", {"hazard_throttle_ms", "sfx_throttle_ms", "description_throttle_ms", "shared_tts_ms"}},
    {"flow", {"pyramid_levels", "pyramid_scale", "window_size", "iterations", "poly_n", "poly_sigma"}},
    {"model", {"path"}},
    {"interpreter", {"backend", "timeout_ms", "latency_ms", "script", "model"}},
    {"synth", {"backend", "timeout_ms", "latency_ms", "model", "voice_id"}},
    {"cache", {"dir", "max_entries"}},
};

class Reader {
 public:
  Reader(const pt::ptree& tree, std::string base) : tree_(tree), base_(std::move(base)) {}

  template <typename T>
  void integer(const std::string& key, T& out) const {
    const auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
    if (!v) return;
    T parsed{};
    const auto* end = v->data() + v->size();
    const auto res = std::from_chars(v->data(), end, parsed);
    if (res.ec == std::errc::result_out_of_range) throw ConfigError(key, "value " + *v + " is out of range");
    if (res.ec != std::errc{} || res.ptr != end) throw ConfigError(key, "expected an integer, got '" + *v + "'");
    out = parsed;
  }

  void real(const std::string& key, double& out) const {
    const auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
    if (!v) return;
    double parsed = 0;
    const auto* end = v->data() + v->size();
    const auto res = std::from_chars(v->data(), end, parsed);
    if (res.ec != std::errc{} || res.ptr != end) throw ConfigError(key, "expected a number, got '" + *v + "'");
    out = parsed;
  }

  void text(const std::string& key, std::string& out) const {
    if (const auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'))) out = *v;
  }

  void path(const std::string& key, std::string& out) const {
    std::string v;
    if (!tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'))) return;
    text(key, v);
    out = v.empty() || fs::path(v).is_absolute() ? v : (fs::path(base_) / v).lexically_normal().string();
  }

 private:
  const pt::ptree& tree_;
  std::string base_;
};

void check_backend(const std::string& section, const BackendConfig& b) {
  if (b.backend != "mock" && b.backend != "live") {
    throw ConfigError(section + ".backend", "must be 'mock' or 'live', got '" + b.backend + "'");
  }
  if (b.timeout_ms <= 0) throw ConfigError(section + ".timeout_ms", "must be positive");
  if (b.latency_ms < 0) throw ConfigError(section + ".latency_ms", "must be >= 0");
}

}  // namespace

void ServerConfig::validate() const {
  if (address.empty()) throw ConfigError("server.address", "must not be empty");
  if (io_threads < 1 || io_threads > 64) throw ConfigError("server.io_threads", "must be in [1, 64]");
  static const std::set<std::string> levels{"trace", "debug", "info", "warn", "error", "off"};
  if (!levels.contains(log_level)) throw ConfigError("server.log_level", "unknown level '" + log_level + "'");
  if (pipeline.batch_size != 2) {
    throw ConfigError("pipeline.batch_size", "only 2 frames per batch is supported, got " +
                                                 std::to_string(pipeline.batch_size));
  }
  if (pipeline.capture_hz < 1 || pipeline.capture_hz > 30) throw ConfigError("pipeline.capture_hz", "must be in [1, 30]");
  if (pipeline.max_in_flight < 1 || pipeline.max_in_flight > 64) {
    throw ConfigError("pipeline.max_in_flight", "must be in [1, 64]");
  }
  const auto& p = pipeline.policy;
  if (p.hazard_throttle_ms < 0) throw ConfigError("policy.hazard_throttle_ms", "must be >= 0");
  if (p.sfx_throttle_ms < 0) throw ConfigError("policy.sfx_throttle_ms", "must be >= 0");
  if (p.description_throttle_ms < 0) throw ConfigError("policy.description_throttle_ms", "must be >= 0");
  if (p.shared_tts_ms < 0) throw ConfigError("policy.shared_tts_ms", "must be >= 0");
  try {
    pipeline.flow.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("flow", e.what());
  }
  if (model_path.empty()) throw ConfigError("model.path", "must not be empty");
  check_backend("interpreter", interpreter);
  check_backend("synth", synth);
  if (interpreter.backend == "mock" && interpreter.script.empty()) {
    throw ConfigError("interpreter.script", "the mock interpreter needs a script file");
  }
  if (cache_dir.empty()) throw ConfigError("cache.dir", "must not be empty");
}

ServerConfig parse_config(const std::string& text, const std::string& base_dir) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("file", "line " + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [section, body] : tree) {
    const auto it = kSchema.find(section);
    if (it == kSchema.end() || body.data().size()) throw ConfigError(section, "unknown section or top-level key");
    for (const auto& [key, value] : body) {
      if (!it->second.contains(key)) throw ConfigError(section + "." + key, "unknown key");
    }
  }

  ServerConfig c;
  const Reader r(tree, base_dir);
  r.text("server.address", c.address);
  r.integer("server.port", c.port);
  r.path("server.log_path", c.log_path);
  r.text("server.log_level", c.log_level);
  r.integer("server.io_threads", c.io_threads);
  r.integer("pipeline.batch_size", c.pipeline.batch_size);
  r.integer("pipeline.capture_hz", c.pipeline.capture_hz);
  r.integer("pipeline.max_in_flight", c.pipeline.max_in_flight);
  r.integer("policy.hazard_throttle_ms", c.pipeline.policy.hazard_throttle_ms);
  r.integer("policy.sfx_throttle_ms", c.pipeline.policy.sfx_throttle_ms);
  r.integer("policy.description_throttle_ms", c.pipeline.policy.description_throttle_ms);
  r.integer("policy.shared_tts_ms", c.pipeline.policy.shared_tts_ms);
  r.integer("flow.pyramid_levels", c.pipeline.flow.pyramid_levels);
  r.real("flow.pyramid_scale", c.pipeline.flow.pyramid_scale);
  r.integer("flow.window_size", c.pipeline.flow.window_size);
  r.integer("flow.iterations", c.pipeline.flow.iterations);
  r.integer("flow.poly_n", c.pipeline.flow.poly_n);
  r.real("flow.poly_sigma", c.pipeline.flow.poly_sigma);
  r.path("model.path", c.model_path);
  for (auto [name, b] : {std::pair{"interpreter", &c.interpreter}, std::pair{"synth", &c.synth}}) {
    const std::string s(name);
    r.text(s + ".backend", b->backend);
    r.integer(s + ".timeout_ms", b->timeout_ms);
    r.integer(s + ".latency_ms", b->latency_ms);
    r.text(s + ".model", b->model);
  }
  r.path("interpreter.script", c.interpreter.script);
  r.text("synth.voice_id", c.synth.voice_id);
  r.path("cache.dir", c.cache_dir);
  r.integer("cache.max_entries", c.cache_max_entries);
  c.validate();
  return c;
}

ServerConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("file", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), fs::absolute(path).parent_path().string());
}

std::string example_config() {
  return R"([server]
address = 127.0.0.1
port = 8765
; NDJSON event log, empty to disable
log_path = events.ndjson
log_level = info
io_threads = 2

[pipeline]
; frames per batch, only 2 is accepted
batch_size = 2
capture_hz = 2
max_in_flight = 2

[policy]
hazard_throttle_ms = 5000
sfx_throttle_ms = 3000
description_throttle_ms = 15000
shared_tts_ms = 4000

[flow]
pyramid_levels = 3
pyramid_scale = 0.5
window_size = 15
iterations = 3
poly_n = 5
poly_sigma = 1.1

[model]
path = model.bin

[interpreter]
; mock or live (live reads GEMINI_API_KEY)
backend = mock
timeout_ms = 2500
latency_ms = 0
script = interpreter_script.json
model = gemini-1.5-flash

[synth]
; mock or live (live reads ELEVENLABS_API_KEY)
backend = mock
timeout_ms = 3000
latency_ms = 0
model = eleven_turbo_v2
voice_id = 21m00Tcm4TlvDq8Ikrwm

[cache]
dir = audio-cache
; 0 keeps everything
max_entries = 0
)";
}

}  // namespace amava::net
