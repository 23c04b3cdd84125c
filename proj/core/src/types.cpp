#include "amava/types.hpp"

#include <algorithm>
#include <cctype>

namespace amava {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view to_string(MovementClass c) {
  switch (c) {
    case MovementClass::low: return "low";
    case MovementClass::medium: return "medium";
    case MovementClass::high: return "high";
  }
  return "low";
}

std::string_view to_string(Branch b) { return b == Branch::low ? "low" : "high"; }

std::string_view to_string(AudioCategory c) {
  switch (c) {
    case AudioCategory::description: return "description";
    case AudioCategory::hazard: return "hazard";
    case AudioCategory::sfx: return "sfx";
    case AudioCategory::none: return "none";
  }
  return "none";
}

std::string_view to_string(BackendFailure::Kind k) {
  return k == BackendFailure::Kind::timeout ? "timeout" : "failure";
}

std::optional<MovementClass> parse_movement_class(std::string_view s) {
  const auto v = lower(s);
  if (v == "low") return MovementClass::low;
  if (v == "medium") return MovementClass::medium;
  if (v == "high") return MovementClass::high;
  return std::nullopt;
}

std::optional<Branch> parse_branch(std::string_view s) {
  const auto v = lower(s);
  if (v == "low") return Branch::low;
  if (v == "high") return Branch::high;
  return std::nullopt;
}

std::optional<AudioCategory> parse_category(std::string_view s) {
  const auto v = lower(s);
  if (v == "description") return AudioCategory::description;
  if (v == "hazard") return AudioCategory::hazard;
  if (v == "sfx") return AudioCategory::sfx;
  if (v == "none") return AudioCategory::none;
  return std::nullopt;
}

}  // namespace amava
