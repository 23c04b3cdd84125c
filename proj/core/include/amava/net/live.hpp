#pragma once

#include <memory>
#include <string>

#include "amava/interpreter.hpp"
#include "amava/synth.hpp"

namespace amava::net {

// Hosted vision-language model over HTTPS. Key from GEMINI_API_KEY.
class GeminiInterpreter : public InterpreterBackend {
 public:
  GeminiInterpreter(std::string api_key, std::string model, Millis timeout_ms);
  static std::shared_ptr<GeminiInterpreter> from_env(const std::string& model, Millis timeout_ms);

  std::string describe(std::span<const EncodedFrame> frames, const std::string& prompt, Branch branch) override;
  Millis timeout_budget_ms() const override { return timeout_ms_; }

 private:
  std::string api_key_;
  std::string model_;
  Millis timeout_ms_;
};

// Hosted speech and sound-effect service over HTTPS; returns MP3.
// Key from ELEVENLABS_API_KEY.
class ElevenLabsSynth : public SynthBackend {
 public:
  ElevenLabsSynth(std::string api_key, std::string model, std::string voice_id, Millis timeout_ms);
  static std::shared_ptr<ElevenLabsSynth> from_env(const std::string& model, const std::string& voice_id,
                                                   Millis timeout_ms);

  AudioClip tts(const std::string& text) override;
  AudioClip sfx(const std::string& text) override;
  Millis timeout_budget_ms() const override { return timeout_ms_; }

 private:
  AudioClip post(const std::string& path, const std::string& body);

  std::string api_key_;
  std::string model_;
  std::string voice_id_;
  Millis timeout_ms_;
};

}  // namespace amava::net
