#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "amava/budget.hpp"
#include "amava/clock.hpp"
#include "amava/types.hpp"

namespace amava {

struct AudioClip {
  std::vector<std::uint8_t> bytes;
  std::string mime;
  AudioCategory category = AudioCategory::none;
  std::uint64_t batch_index = 0;
  Millis duration_ms = 0;  // 0 when unknown
};

// Speech and sound-effect service. Implementations throw BackendError on
// failure and must tolerate concurrent calls.
class SynthBackend {
 public:
  virtual ~SynthBackend() = default;
  virtual AudioClip tts(const std::string& text) = 0;
  virtual AudioClip sfx(const std::string& text) = 0;
  virtual Millis timeout_budget_ms() const = 0;
};

inline constexpr Millis kDefaultSynthTimeoutMs = 3000;

// std::invalid_argument on blank text; backend trouble comes back as a
// BackendFailure, never a partial clip.
Outcome<AudioClip> synthesize_tts(const std::shared_ptr<SynthBackend>& backend, const std::string& text,
                                  const Clock& clock);
Outcome<AudioClip> synthesize_sfx(const std::shared_ptr<SynthBackend>& backend, const std::string& text,
                                  const Clock& clock);
Outcome<AudioClip> synthesize(const std::shared_ptr<SynthBackend>& backend, AudioCategory category,
                              const std::string& text, const Clock& clock);

// Offline synthesizer. Speech renders one 60 ms tone per word, sound
// effects one second of shaped noise; both are 16 kHz mono PCM16 WAV and
// depend only on the kind and the normalized text.
class MockSynth : public SynthBackend {
 public:
  static constexpr int kSampleRate = 16000;
  static constexpr Millis kWordMs = 60;
  static constexpr Millis kSfxMs = 1000;

  explicit MockSynth(std::shared_ptr<Clock> clock, Millis latency_ms = 0, Millis timeout_ms = kDefaultSynthTimeoutMs);

  AudioClip tts(const std::string& text) override;
  AudioClip sfx(const std::string& text) override;
  Millis timeout_budget_ms() const override { return timeout_ms_; }

  void set_latency_ms(Millis ms) { latency_ms_.store(ms); }
  void set_failing(bool fail) { failing_.store(fail); }

  std::size_t tts_calls() const { return tts_calls_.load(); }
  std::size_t sfx_calls() const { return sfx_calls_.load(); }
  std::size_t calls() const { return tts_calls() + sfx_calls(); }

 private:
  void before_call();

  std::shared_ptr<Clock> clock_;
  std::atomic<Millis> latency_ms_;
  Millis timeout_ms_;
  std::atomic<bool> failing_{false};
  std::atomic<std::size_t> tts_calls_{0};
  std::atomic<std::size_t> sfx_calls_{0};
};

struct WavInfo {
  int sample_rate = 0;
  int channels = 0;
  int bits_per_sample = 0;
  std::size_t data_bytes = 0;
  Millis duration_ms = 0;
};

std::vector<std::uint8_t> encode_wav_pcm16(const std::vector<std::int16_t>& samples, int sample_rate);
// Throws std::invalid_argument on anything that is not a PCM RIFF/WAVE file.
WavInfo parse_wav(const std::vector<std::uint8_t>& bytes);

}  // namespace amava
