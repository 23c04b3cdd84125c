#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "amava/budget.hpp"
#include "amava/clock.hpp"
#include "amava/types.hpp"

namespace amava {

struct SceneResponse {
  AudioCategory category = AudioCategory::none;
  std::string content;  // empty iff category is none
  std::string raw;
};

// Vision-language service that turns a frame batch and a prompt into text.
// Implementations throw BackendError on failure and must tolerate
// concurrent calls.
class InterpreterBackend {
 public:
  virtual ~InterpreterBackend() = default;
  virtual std::string describe(std::span<const EncodedFrame> frames, const std::string& prompt, Branch branch) = 0;
  virtual Millis timeout_budget_ms() const = 0;
};

inline constexpr Millis kDefaultInterpreterTimeoutMs = 2500;
inline constexpr std::size_t kMaxDescriptionWords = 40;

std::string build_prompt(Branch branch);

// Reads `category: content` from the first line. Never throws; anything that
// does not match degrades to category none.
SceneResponse parse_response(const std::string& raw);

// Inverse of parse_response for well-formed pairs.
std::string format_response(AudioCategory category, const std::string& content);

// Calls the backend within its budget. The low branch yields a description
// of at most kMaxDescriptionWords words; the high branch is parsed.
Outcome<SceneResponse> interpret(const std::shared_ptr<InterpreterBackend>& backend,
                                 std::span<const EncodedFrame> frames, Branch branch, const Clock& clock);

// Scripted stand-in for the vision-language service. Call i answers with
// entry i (cycling when the script runs out). Entries whose branch pattern
// does not match the call fail with BackendError.
class MockInterpreter : public InterpreterBackend {
 public:
  enum class Pattern { any, low, high };

  struct Entry {
    Pattern pattern = Pattern::any;
    std::string response;
    Millis latency_ms = -1;  // -1: use the mock-wide latency
    bool fail = false;
  };

  MockInterpreter(std::vector<Entry> script, std::shared_ptr<Clock> clock, Millis latency_ms = 0,
                  Millis timeout_ms = kDefaultInterpreterTimeoutMs);

  // JSON: {"latency_ms": 0, "timeout_ms": 2500, "entries": [{"branch": "high",
  // "response": "sfx: passing car", "latency_ms": 10, "fail": false}, ...]}
  static std::shared_ptr<MockInterpreter> from_json_file(const std::string& path, std::shared_ptr<Clock> clock);
  static std::shared_ptr<MockInterpreter> from_json_text(const std::string& text, std::shared_ptr<Clock> clock);

  std::string describe(std::span<const EncodedFrame> frames, const std::string& prompt, Branch branch) override;
  Millis timeout_budget_ms() const override { return timeout_ms_; }

  std::size_t calls() const { return cursor_.load(); }
  void set_latency_ms(Millis ms) { latency_ms_.store(ms); }

 private:
  std::vector<Entry> script_;
  std::shared_ptr<Clock> clock_;
  std::atomic<Millis> latency_ms_;
  Millis timeout_ms_;
  std::atomic<std::size_t> cursor_{0};
};

}  // namespace amava
