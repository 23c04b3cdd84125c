#pragma once

#include <map>
#include <optional>
#include <string_view>

#include "amava/types.hpp"

namespace amava {

struct PolicyConfig {
  Millis hazard_throttle_ms = 5000;
  Millis sfx_throttle_ms = 3000;
  Millis description_throttle_ms = 15000;
  Millis shared_tts_ms = 4000;

  Millis throttle_for(AudioCategory c) const;
  void validate() const;
};

enum class EmissionDecision { play_cached, synthesize_and_play, synthesize_and_cache_only, skip_throttled, skip_none };

std::string_view to_string(EmissionDecision d);
std::optional<EmissionDecision> parse_decision(std::string_view s);
constexpr bool is_played(EmissionDecision d) {
  return d == EmissionDecision::play_cached || d == EmissionDecision::synthesize_and_play;
}

// Timestamps of the last clip actually played.
struct ThrottleState {
  std::map<AudioCategory, Millis> last_play;
  std::optional<Millis> last_tts_play;
};

// Category none is a precondition violation (std::invalid_argument).
bool should_throttle(const ThrottleState& state, AudioCategory category, Millis now_ms, const PolicyConfig& cfg);

EmissionDecision decide(AudioCategory category, bool is_cached, bool throttled);

// Throws MonotonicityError if now_ms precedes a timestamp it would replace.
void record_playback(ThrottleState& state, AudioCategory category, Millis now_ms);

}  // namespace amava
