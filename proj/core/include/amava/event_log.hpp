#pragma once

#include <cstdint>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "amava/policy.hpp"
#include "amava/types.hpp"

namespace amava {

// Outcome of one batch.
struct EmissionEvent {
  std::uint64_t batch_index = 0;
  AudioCategory category = AudioCategory::none;
  EmissionDecision decision = EmissionDecision::skip_none;
  std::optional<std::string> clip_key;
  Millis t_batch = 0;
  Millis t_decision = 0;
  std::optional<Millis> t_sent;  // only when audio went out

  bool operator==(const EmissionEvent&) const = default;
};

nlohmann::json to_json(const EmissionEvent& e);
// Throws std::invalid_argument on missing or mistyped fields.
EmissionEvent emission_from_json(const nlohmann::json& j);

// Newline-delimited JSON sink. Emission records carry exactly the event
// fields; other records carry a "type" field ("drop", "cache_fill", ...).
class EventLog {
 public:
  virtual ~EventLog() = default;
  virtual void append(const nlohmann::json& record) = 0;
  virtual void flush() {}

  void emission(const EmissionEvent& e) { append(to_json(e)); }
  void drop(std::uint64_t batch_index, Millis t, const std::string& reason);
  void cache_fill(std::uint64_t batch_index, const std::string& clip_key, Millis t, bool ok);
};

class FileEventLog : public EventLog {
 public:
  explicit FileEventLog(const std::string& path);
  void append(const nlohmann::json& record) override;
  void flush() override;

 private:
  std::mutex mu_;
  std::ofstream out_;
};

class MemoryEventLog : public EventLog {
 public:
  void append(const nlohmann::json& record) override;
  std::vector<std::string> lines() const;
  std::string text() const;
  std::vector<EmissionEvent> emissions() const;
  std::size_t count_type(const std::string& type) const;

 private:
  mutable std::mutex mu_;
  std::vector<nlohmann::json> records_;
};

class NullEventLog : public EventLog {
 public:
  void append(const nlohmann::json&) override {}
};

}  // namespace amava
