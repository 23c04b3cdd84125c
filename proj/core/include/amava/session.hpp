#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "amava/cache.hpp"
#include "amava/classifier.hpp"
#include "amava/clock.hpp"
#include "amava/event_log.hpp"
#include "amava/interpreter.hpp"
#include "amava/motion.hpp"
#include "amava/policy.hpp"
#include "amava/synth.hpp"

namespace amava {

struct PipelineConfig {
  int batch_size = 2;     // only 2 is supported
  int capture_hz = 2;
  int max_in_flight = 2;
  FlowParams flow;
  PolicyConfig policy;

  void validate() const;
};

// Receives played clips in decision order.
class AudioSink {
 public:
  virtual ~AudioSink() = default;
  virtual void deliver(const AudioClip& clip, const std::string& caption) = 0;
};

class Executor {
 public:
  virtual ~Executor() = default;
  virtual void post(std::function<void()> task) = 0;
};

class InlineExecutor : public Executor {
 public:
  void post(std::function<void()> task) override { task(); }
};

// One background thread draining a FIFO; the destructor finishes queued work.
class BackgroundExecutor : public Executor {
 public:
  BackgroundExecutor();
  ~BackgroundExecutor() override;
  void post(std::function<void()> task) override;
  void wait_idle();

 private:
  void loop();

  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::function<void()>> tasks_;
  bool busy_ = false;
  bool stop_ = false;
  std::thread worker_;
};

struct SessionDeps {
  std::shared_ptr<const MotionModel> model;
  std::shared_ptr<InterpreterBackend> interpreter;
  std::shared_ptr<SynthBackend> synth;
  std::shared_ptr<AudioCache> cache;
  std::shared_ptr<EventLog> log;
  std::shared_ptr<Clock> clock;
  std::shared_ptr<Executor> background;  // cache-only synthesis; inline when null
  std::shared_ptr<AudioSink> sink;       // may be null
};

// Stage one of a batch: features, branch, scene response. Safe to run for
// several batches at once.
struct Analysis {
  std::optional<SceneResponse> scene;  // empty when a component failed
  Branch branch = Branch::low;
  MotionFeatures features;
};

class Session {
 public:
  Session(std::string id, PipelineConfig cfg, SessionDeps deps);

  const std::string& id() const { return id_; }
  const PipelineConfig& config() const { return cfg_; }
  const SessionDeps& deps() const { return deps_; }

  // Buffers a frame; returns a batch once two frames are pending. Frames
  // larger than kFeatureMaxSide are downscaled here. Throws SessionClosed.
  std::optional<FrameBatch> ingest_frame(const GrayImage& image, Millis received_at_ms,
                                         EncodedFrame original = {});

  Analysis analyze(const FrameBatch& batch) const noexcept;
  // Stage two, serialized per session: throttle, cache, decide, synthesize,
  // deliver, log. Empty after close.
  std::vector<EmissionEvent> emit(const FrameBatch& batch, const Analysis& analysis) noexcept;

  std::vector<EmissionEvent> process_batch(const FrameBatch& batch) noexcept { return emit(batch, analyze(batch)); }

  void close();
  bool closed() const;

 private:
  void fill_cache_in_background(const std::string& text, std::uint64_t batch_index);

  std::string id_;
  PipelineConfig cfg_;
  SessionDeps deps_;

  mutable std::mutex ingest_mu_;
  std::vector<GrayFrame> pending_;
  std::vector<EncodedFrame> pending_originals_;
  std::uint64_t next_index_ = 0;
  bool closed_ = false;

  std::mutex emit_mu_;
  ThrottleState throttle_;
  std::shared_ptr<std::mutex> fills_mu_ = std::make_shared<std::mutex>();
  std::shared_ptr<std::set<std::string>> fills_ = std::make_shared<std::set<std::string>>();
};

// Runs batches of one session on up to max_in_flight workers. A batch that
// arrives while the cap is reached evicts the oldest batch that has not
// started yet (which is the new batch itself when all are running).
class SessionRunner {
 public:
  explicit SessionRunner(std::shared_ptr<Session> session);
  ~SessionRunner();
  SessionRunner(const SessionRunner&) = delete;
  SessionRunner& operator=(const SessionRunner&) = delete;

  // Never waits on batch processing.
  void offer_frame(const GrayImage& image, Millis received_at_ms, EncodedFrame original = {});
  void offer_batch(FrameBatch batch);

  // Waits for admitted batches to finish, then closes the session.
  void finish();
  // Closes now: queued batches are dropped and running ones are discarded.
  void close();

  std::uint64_t processed() const;
  std::uint64_t dropped() const;
  const std::shared_ptr<Session>& session() const { return session_; }

 private:
  void worker();
  void stop_workers();

  std::shared_ptr<Session> session_;
  mutable std::mutex mu_;
  std::counting_semaphore<> work_{0};  // one token per queued batch, plus one per worker at stop
  std::condition_variable idle_cv_;
  std::deque<FrameBatch> queue_;
  std::size_t running_ = 0;
  bool stopping_ = false;
  std::uint64_t processed_ = 0;
  std::uint64_t dropped_ = 0;
  std::vector<std::thread> workers_;
};

struct SourceFrame {
  GrayImage image;
  EncodedFrame original;
};

// Yields frames until the source ends (nullopt).
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual std::optional<SourceFrame> next() = 0;
};

struct RunSummary {
  std::uint64_t processed = 0;
  std::uint64_t dropped = 0;
};

// Pulls frames stamped with the session clock until the source ends, then
// drains (or, with drain = false, discards) in-flight work and closes.
RunSummary run_session(const std::shared_ptr<Session>& session, FrameSource& source, bool drain = true);

}  // namespace amava
