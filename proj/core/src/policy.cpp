#include "amava/policy.hpp"

#include <stdexcept>
#include <string>

#include "amava/errors.hpp"

namespace amava {

Millis PolicyConfig::throttle_for(AudioCategory c) const {
  switch (c) {
    case AudioCategory::hazard: return hazard_throttle_ms;
    case AudioCategory::sfx: return sfx_throttle_ms;
    case AudioCategory::description: return description_throttle_ms;
    case AudioCategory::none: break;
  }
  throw std::invalid_argument("category none has no throttle interval");
}

void PolicyConfig::validate() const {
  if (hazard_throttle_ms < 0) throw std::invalid_argument("policy.hazard_throttle_ms must be >= 0");
  if (sfx_throttle_ms < 0) throw std::invalid_argument("policy.sfx_throttle_ms must be >= 0");
  if (description_throttle_ms < 0) throw std::invalid_argument("policy.description_throttle_ms must be >= 0");
  if (shared_tts_ms < 0) throw std::invalid_argument("policy.shared_tts_ms must be >= 0");
}

std::string_view to_string(EmissionDecision d) {
  switch (d) {
    case EmissionDecision::play_cached: return "play_cached";
    case EmissionDecision::synthesize_and_play: return "synthesize_and_play";
    case EmissionDecision::synthesize_and_cache_only: return "synthesize_and_cache_only";
    case EmissionDecision::skip_throttled: return "skip_throttled";
    case EmissionDecision::skip_none: return "skip_none";
  }
  return "skip_none";
}

std::optional<EmissionDecision> parse_decision(std::string_view s) {
  for (auto d : {EmissionDecision::play_cached, EmissionDecision::synthesize_and_play,
                 EmissionDecision::synthesize_and_cache_only, EmissionDecision::skip_throttled,
                 EmissionDecision::skip_none}) {
    if (to_string(d) == s) return d;
  }
  return std::nullopt;
}

bool should_throttle(const ThrottleState& state, AudioCategory category, Millis now_ms, const PolicyConfig& cfg) {
  if (category == AudioCategory::none) throw std::invalid_argument("should_throttle: category none");
  if (const auto it = state.last_play.find(category); it != state.last_play.end()) {
    if (now_ms - it->second < cfg.throttle_for(category)) return true;
  }
  return is_tts_category(category) && state.last_tts_play && now_ms - *state.last_tts_play < cfg.shared_tts_ms;
}

EmissionDecision decide(AudioCategory category, bool is_cached, bool throttled) {
  if (category == AudioCategory::none) return EmissionDecision::skip_none;
  if (throttled) return EmissionDecision::skip_throttled;
  if (category == AudioCategory::sfx) {
    return is_cached ? EmissionDecision::play_cached : EmissionDecision::synthesize_and_cache_only;
  }
  return is_cached ? EmissionDecision::play_cached : EmissionDecision::synthesize_and_play;
}

void record_playback(ThrottleState& state, AudioCategory category, Millis now_ms) {
  if (category == AudioCategory::none) throw std::invalid_argument("record_playback: category none");
  const auto it = state.last_play.find(category);
  if (it != state.last_play.end() && now_ms < it->second) {
    throw MonotonicityError("playback at " + std::to_string(now_ms) + " ms precedes recorded " +
                            std::to_string(it->second) + " ms");
  }
  const bool tts = is_tts_category(category);
  if (tts && state.last_tts_play && now_ms < *state.last_tts_play) {
    throw MonotonicityError("playback at " + std::to_string(now_ms) + " ms precedes shared speech timer " +
                            std::to_string(*state.last_tts_play) + " ms");
  }
  state.last_play[category] = now_ms;
  if (tts) state.last_tts_play = now_ms;
}

}  // namespace amava
