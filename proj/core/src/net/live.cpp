#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "amava/net/live.hpp"

#include <cstdlib>

#include "amava/errors.hpp"
#include "amava/net/codec.hpp"
#include "amava/net/config.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace amava::net {

namespace {

std::string env_key(const char* name, const std::string& section) {
  const char* v = std::getenv(name);
  if (!v || !*v) throw ConfigError(section + ".backend", std::string("live backend needs ") + name + " to be set");
  return v;
}

void set_timeouts(httplib::SSLClient& cli, Millis ms) {
  const auto sec = static_cast<time_t>(ms / 1000);
  const auto usec = static_cast<time_t>((ms % 1000) * 1000);
  cli.set_connection_timeout(sec, usec);
  cli.set_read_timeout(sec, usec);
  cli.set_write_timeout(sec, usec);
}

}  // namespace

GeminiInterpreter::GeminiInterpreter(std::string api_key, std::string model, Millis timeout_ms)
    : api_key_(std::move(api_key)), model_(std::move(model)), timeout_ms_(timeout_ms) {}

std::shared_ptr<GeminiInterpreter> GeminiInterpreter::from_env(const std::string& model, Millis timeout_ms) {
  return std::make_shared<GeminiInterpreter>(env_key("GEMINI_API_KEY", "interpreter"), model, timeout_ms);
}

std::string GeminiInterpreter::describe(std::span<const EncodedFrame> frames, const std::string& prompt, Branch) {
  nlohmann::json parts = nlohmann::json::array();
  for (const auto& f : frames) {
    parts.push_back({{"inline_data", {{"mime_type", f.mime}, {"data", base64_encode(f.bytes)}}}});
  }
  parts.push_back({{"text", prompt}});
  const nlohmann::json body = {{"contents", {{{"role", "user"}, {"parts", parts}}}}};

  httplib::SSLClient cli("generativelanguage.googleapis.com");
  set_timeouts(cli, timeout_ms_);
  const httplib::Headers headers{{"x-goog-api-key", api_key_}};
  auto res = cli.Post("/v1beta/models/" + model_ + ":generateContent", headers, body.dump(), "application/json");
  if (!res) throw BackendError("interpreter request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw BackendError("interpreter returned HTTP " + std::to_string(res->status));
  try {
    const auto doc = nlohmann::json::parse(res->body);
    std::string text;
    for (const auto& p : doc.at("candidates").at(0).at("content").at("parts")) {
      if (p.contains("text")) text += p["text"].get<std::string>();
    }
    return text;
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("interpreter reply not understood: ") + e.what());
  }
}

ElevenLabsSynth::ElevenLabsSynth(std::string api_key, std::string model, std::string voice_id, Millis timeout_ms)
    : api_key_(std::move(api_key)), model_(std::move(model)), voice_id_(std::move(voice_id)), timeout_ms_(timeout_ms) {}

std::shared_ptr<ElevenLabsSynth> ElevenLabsSynth::from_env(const std::string& model, const std::string& voice_id,
                                                           Millis timeout_ms) {
  return std::make_shared<ElevenLabsSynth>(env_key("ELEVENLABS_API_KEY", "synth"), model, voice_id, timeout_ms);
}

AudioClip ElevenLabsSynth::post(const std::string& path, const std::string& body) {
  httplib::SSLClient cli("api.elevenlabs.io");
  set_timeouts(cli, timeout_ms_);
  const httplib::Headers headers{{"xi-api-key", api_key_}, {"Accept", "audio/mpeg"}};
  auto res = cli.Post(path, headers, body, "application/json");
  if (!res) throw BackendError("synthesis request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw BackendError("synthesis returned HTTP " + std::to_string(res->status));
  if (res->body.empty()) throw BackendError("synthesis returned no audio");
  AudioClip clip;
  clip.bytes.assign(res->body.begin(), res->body.end());
  clip.mime = "audio/mpeg";
  return clip;
}

AudioClip ElevenLabsSynth::tts(const std::string& text) {
  return post("/v1/text-to-speech/" + voice_id_, nlohmann::json{{"text", text}, {"model_id", model_}}.dump());
}

AudioClip ElevenLabsSynth::sfx(const std::string& text) {
  return post("/v1/sound-generation", nlohmann::json{{"text", text}}.dump());
}

}  // namespace amava::net
