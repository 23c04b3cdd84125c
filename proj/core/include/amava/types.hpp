#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace amava {

using Millis = std::int64_t;

enum class MovementClass { low = 0, medium = 1, high = 2 };

// Routing after medium and high are merged.
enum class Branch { low, high };

enum class AudioCategory { description, hazard, sfx, none };

std::string_view to_string(MovementClass c);
std::string_view to_string(Branch b);
std::string_view to_string(AudioCategory c);

std::optional<MovementClass> parse_movement_class(std::string_view s);
std::optional<Branch> parse_branch(std::string_view s);
std::optional<AudioCategory> parse_category(std::string_view s);

// Categories voiced by text-to-speech share one spacing timer.
constexpr bool is_tts_category(AudioCategory c) {
  return c == AudioCategory::hazard || c == AudioCategory::description;
}

// An original camera frame as the client sent it.
struct EncodedFrame {
  std::string mime = "image/jpeg";
  std::vector<std::uint8_t> bytes;
};

// Typed skip signal returned by remote backends instead of a result.
struct BackendFailure {
  enum class Kind { timeout, failure };
  Kind kind = Kind::failure;
  std::string message;
};

std::string_view to_string(BackendFailure::Kind k);

}  // namespace amava
