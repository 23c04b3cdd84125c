#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "amava/cache.hpp"
#include "amava/classifier.hpp"
#include "amava/event_log.hpp"
#include "amava/interpreter.hpp"
#include "amava/session.hpp"
#include "amava/synth.hpp"

namespace amava::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

// Unit-scaler network that answers high when flow_mag > threshold and low
// below it.
MotionModel threshold_model(double flow_threshold = 1.1);

// Frame pairs that the threshold model puts in the low (static) or high
// (moving) branch.
struct PairImages {
  GrayImage first;
  GrayImage second;
};
PairImages static_pair(int side, std::uint64_t seed);
PairImages moving_pair(int side, std::uint64_t seed, double shift = 4.0);

struct ScriptedBatch {
  bool moving = false;
  MockInterpreter::Pattern pattern = MockInterpreter::Pattern::any;
  std::string response;
};

// The 20-batch scripted session: batch i forms at t = 1000 i + 500.
std::vector<ScriptedBatch> golden_script();

struct GoldenRun {
  std::vector<EmissionEvent> events;
  std::string log_text;
  std::size_t synth_calls = 0;
};

// Plays golden_script() through a Session on a manual clock with inline
// cache filling and a fresh cache directory.
GoldenRun run_golden(const std::filesystem::path& cache_dir);

// Hand-derived expectation for golden_script().
std::vector<EmissionEvent> golden_expected();

// Collects delivered clips.
class RecordingSink : public AudioSink {
 public:
  void deliver(const AudioClip& clip, const std::string& caption) override;
  std::vector<std::pair<AudioClip, std::string>> items() const;

 private:
  mutable std::mutex mu_;
  std::vector<std::pair<AudioClip, std::string>> items_;
};

// Test-controlled frame feed: frame k is released at clock time k * period.
class TimedFrameSource : public FrameSource {
 public:
  TimedFrameSource(std::shared_ptr<Clock> clock, std::vector<GrayImage> frames, Millis period_ms,
                   Millis tail_ms = 0);
  std::optional<SourceFrame> next() override;
  // Real wall time spent inside the consumer between next() calls is not
  // measured here; see SessionRunner tests for ingest timing.

 private:
  std::shared_ptr<Clock> clock_;
  std::vector<GrayImage> frames_;
  Millis period_ms_;
  Millis tail_ms_;
  std::size_t next_ = 0;
};

// Frames for `batches` batches alternating according to `moving`.
std::vector<GrayImage> frame_script(const std::vector<bool>& moving, int side, std::uint64_t seed);

}  // namespace amava::testing
