#include "amava/synth.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <cstring>
#include <numbers>
#include <random>

#include "amava/cache.hpp"
#include "amava/errors.hpp"
#include "amava/text.hpp"

namespace amava {

namespace {

void put_le(std::vector<std::uint8_t>& out, std::uint32_t v, int n) {
  for (int i = 0; i < n; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_le(const std::vector<std::uint8_t>& b, std::size_t at, int n) {
  std::uint32_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<std::uint32_t>(b[at + i]) << (8 * i);
  return v;
}

std::int16_t to_pcm(double x) {
  return static_cast<std::int16_t>(std::lround(std::clamp(x, -1.0, 1.0) * 32767.0));
}

std::uint64_t seed_from(const std::array<std::uint8_t, 32>& digest) {
  std::uint64_t s = 0;
  for (int i = 0; i < 8; ++i) s = (s << 8) | digest[i];
  return s;
}

Outcome<AudioClip> run(const std::shared_ptr<SynthBackend>& backend, AudioCategory category, const std::string& text,
                       const Clock& clock) {
  if (trim(text).empty()) throw std::invalid_argument("synthesis text must not be blank");
  if (category == AudioCategory::none) throw std::invalid_argument("nothing to synthesize for category none");
  std::function<AudioClip()> call = [backend, category, text] {
    AudioClip clip = category == AudioCategory::sfx ? backend->sfx(text) : backend->tts(text);
    if (clip.bytes.empty() || clip.mime.empty()) throw BackendError("synthesizer returned an empty clip");
    clip.category = category;
    return clip;
  };
  return call_with_budget(std::move(call), backend->timeout_budget_ms(), clock);
}

}  // namespace

Outcome<AudioClip> synthesize_tts(const std::shared_ptr<SynthBackend>& backend, const std::string& text,
                                  const Clock& clock) {
  return run(backend, AudioCategory::description, text, clock);
}

Outcome<AudioClip> synthesize_sfx(const std::shared_ptr<SynthBackend>& backend, const std::string& text,
                                  const Clock& clock) {
  return run(backend, AudioCategory::sfx, text, clock);
}

Outcome<AudioClip> synthesize(const std::shared_ptr<SynthBackend>& backend, AudioCategory category,
                              const std::string& text, const Clock& clock) {
  return run(backend, category, text, clock);
}

std::vector<std::uint8_t> encode_wav_pcm16(const std::vector<std::int16_t>& samples, int sample_rate) {
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_le(out, 36 + data_bytes, 4);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_le(out, 16, 4);
  put_le(out, 1, 2);  // PCM
  put_le(out, 1, 2);  // mono
  put_le(out, static_cast<std::uint32_t>(sample_rate), 4);
  put_le(out, static_cast<std::uint32_t>(sample_rate * 2), 4);
  put_le(out, 2, 2);
  put_le(out, 16, 2);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_le(out, data_bytes, 4);
  for (auto s : samples) put_le(out, static_cast<std::uint16_t>(s), 2);
  return out;
}

WavInfo parse_wav(const std::vector<std::uint8_t>& b) {
  auto tag = [&](std::size_t at, const char* t) { return at + 4 <= b.size() && std::memcmp(&b[at], t, 4) == 0; };
  if (!tag(0, "RIFF") || !tag(8, "WAVE")) throw std::invalid_argument("not a RIFF/WAVE file");
  if (get_le(b, 4, 4) + 8 != b.size()) throw std::invalid_argument("RIFF size does not match file size");
  WavInfo info;
  bool have_fmt = false;
  std::size_t at = 12;
  while (at + 8 <= b.size()) {
    const std::uint32_t len = get_le(b, at + 4, 4);
    if (at + 8 + len > b.size()) throw std::invalid_argument("WAV chunk overruns file");
    if (tag(at, "fmt ")) {
      if (len < 16 || get_le(b, at + 8, 2) != 1) throw std::invalid_argument("WAV is not PCM");
      info.channels = static_cast<int>(get_le(b, at + 10, 2));
      info.sample_rate = static_cast<int>(get_le(b, at + 12, 4));
      info.bits_per_sample = static_cast<int>(get_le(b, at + 22, 2));
      have_fmt = true;
    } else if (tag(at, "data")) {
      if (!have_fmt) throw std::invalid_argument("WAV data chunk before fmt chunk");
      if (info.channels <= 0 || info.sample_rate <= 0 || info.bits_per_sample % 8 != 0 || info.bits_per_sample == 0) {
        throw std::invalid_argument("WAV fmt chunk is invalid");
      }
      info.data_bytes = len;
      const std::size_t frame = static_cast<std::size_t>(info.channels) * (info.bits_per_sample / 8);
      info.duration_ms = static_cast<Millis>(len / frame * 1000 / static_cast<std::size_t>(info.sample_rate));
      return info;
    }
    at += 8 + len + (len & 1);
  }
  throw std::invalid_argument("WAV has no data chunk");
}

MockSynth::MockSynth(std::shared_ptr<Clock> clock, Millis latency_ms, Millis timeout_ms)
    : clock_(std::move(clock)), latency_ms_(latency_ms), timeout_ms_(timeout_ms) {
  if (!clock_) throw std::invalid_argument("MockSynth needs a clock");
  if (latency_ms < 0 || timeout_ms <= 0) throw std::invalid_argument("MockSynth: bad latency or timeout");
}

void MockSynth::before_call() {
  const Millis latency = latency_ms_.load();
  if (latency > 0) clock_->sleep_for(latency);
  if (failing_.load()) throw BackendError("mock synthesizer set to fail");
}

AudioClip MockSynth::tts(const std::string& text) {
  ++tts_calls_;
  before_call();
  const std::string norm = normalize_prompt(text);
  const auto digest = sha256("tts:" + norm);
  const std::size_t words = std::max<std::size_t>(1, split_words(norm).size());
  const std::size_t per_word = kSampleRate * kWordMs / 1000;
  std::vector<std::int16_t> samples(words * per_word);
  for (std::size_t w = 0; w < words; ++w) {
    const double freq = 220.0 + 6.0 * digest[w % digest.size()];
    for (std::size_t i = 0; i < per_word; ++i) {
      const double t = static_cast<double>(i) / kSampleRate;
      const double fade = std::min({1.0, i / 80.0, (per_word - 1 - i) / 80.0});
      samples[w * per_word + i] = to_pcm(0.4 * fade * std::sin(2.0 * std::numbers::pi * freq * t));
    }
  }
  AudioClip clip;
  clip.bytes = encode_wav_pcm16(samples, kSampleRate);
  clip.mime = "audio/wav";
  clip.category = AudioCategory::description;
  clip.duration_ms = static_cast<Millis>(words) * kWordMs;
  return clip;
}

AudioClip MockSynth::sfx(const std::string& text) {
  ++sfx_calls_;
  before_call();
  const auto digest = sha256("sfx:" + normalize_prompt(text));
  std::mt19937_64 rng(seed_from(digest));
  const std::size_t n = kSampleRate * kSfxMs / 1000;
  // one-pole low-pass noise with a decaying envelope; the pole depends on the text
  const double pole = 0.5 + digest[8] / 600.0;
  std::vector<std::int16_t> samples(n);
  double y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
    y = pole * y + (1.0 - pole) * x;
    const double env = std::exp(-3.0 * static_cast<double>(i) / n);
    samples[i] = to_pcm(1.5 * env * y);
  }
  AudioClip clip;
  clip.bytes = encode_wav_pcm16(samples, kSampleRate);
  clip.mime = "audio/wav";
  clip.category = AudioCategory::sfx;
  clip.duration_ms = kSfxMs;
  return clip;
}

}  // namespace amava
