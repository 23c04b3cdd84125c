#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "amava/event_log.hpp"

namespace amava {

struct CategoryGap {
  double mean_s = 0.0;
  std::uint64_t samples = 0;  // consecutive played pairs
  bool operator==(const CategoryGap&) const = default;
};

struct SessionReport {
  double latency_mean_ms = 0.0;
  double latency_median_ms = 0.0;
  double latency_p95_ms = 0.0;  // nearest rank
  double reordering_rate = 0.0;
  std::uint64_t played = 0;
  std::map<AudioCategory, CategoryGap> gaps;  // description, hazard, sfx
  std::map<EmissionDecision, std::uint64_t> decisions;
  std::uint64_t drops = 0;

  bool operator==(const SessionReport&) const = default;
};

// Played events are ordered by t_sent, ties broken by batch_index.
SessionReport analyze(const std::vector<EmissionEvent>& events, std::uint64_t drops = 0);
// Reads an NDJSON log; MalformedRecord carries the 1-based line number.
SessionReport analyze(std::istream& ndjson);
SessionReport analyze_file(const std::string& path);

// Two-column CSV (metric,value), fixed row order.
void export_csv(const SessionReport& r, const std::string& path);
std::string to_csv(const SessionReport& r);
SessionReport parse_csv(std::istream& in);
SessionReport load_csv(const std::string& path);

}  // namespace amava
