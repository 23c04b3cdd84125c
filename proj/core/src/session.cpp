#include "amava/session.hpp"

#include <algorithm>

#include <pthread.h>
#include <sched.h>
#include <sys/resource.h>
#include <unistd.h>

#include <spdlog/spdlog.h>

#include "amava/errors.hpp"

namespace amava {

namespace {
constexpr int kWorkerNice = 10;
}  // namespace

void PipelineConfig::validate() const {
  if (batch_size != 2) {
    throw std::invalid_argument("pipeline.batch_size: only 2 frames per batch is supported, got " +
                                std::to_string(batch_size));
  }
  if (capture_hz < 1 || capture_hz > 30) throw std::invalid_argument("pipeline.capture_hz must be in [1, 30]");
  if (max_in_flight < 1 || max_in_flight > 64) throw std::invalid_argument("pipeline.max_in_flight must be in [1, 64]");
  flow.validate();
  policy.validate();
}

BackgroundExecutor::BackgroundExecutor() : worker_([this] { loop(); }) {}

BackgroundExecutor::~BackgroundExecutor() {
  {
    std::lock_guard lock(mu_);
    stop_ = true;
  }
  cv_.notify_all();
  worker_.join();
}

void BackgroundExecutor::post(std::function<void()> task) {
  {
    std::lock_guard lock(mu_);
    tasks_.push_back(std::move(task));
  }
  cv_.notify_all();
}

void BackgroundExecutor::wait_idle() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return tasks_.empty() && !busy_; });
}

void BackgroundExecutor::loop() {
  std::unique_lock lock(mu_);
  for (;;) {
    cv_.wait(lock, [&] { return stop_ || !tasks_.empty(); });
    if (tasks_.empty()) return;
    auto task = std::move(tasks_.front());
    tasks_.pop_front();
    busy_ = true;
    lock.unlock();
    try {
      task();
    } catch (const std::exception& e) {
      spdlog::error("background task failed: {}", e.what());
    }
    lock.lock();
    busy_ = false;
    cv_.notify_all();
  }
}

Session::Session(std::string id, PipelineConfig cfg, SessionDeps deps)
    : id_(std::move(id)), cfg_(std::move(cfg)), deps_(std::move(deps)) {
  cfg_.validate();
  if (!deps_.model || !deps_.interpreter || !deps_.synth || !deps_.cache || !deps_.clock) {
    throw std::invalid_argument("session needs a model, interpreter, synthesizer, cache and clock");
  }
  if (!deps_.log) deps_.log = std::make_shared<NullEventLog>();
  if (!deps_.background) deps_.background = std::make_shared<InlineExecutor>();
}

std::optional<FrameBatch> Session::ingest_frame(const GrayImage& image, Millis received_at_ms, EncodedFrame original) {
  GrayFrame frame(std::max(image.width, image.height) > kFeatureMaxSide ? downscale_to_max_side(image, kFeatureMaxSide)
                                                                        : image,
                  received_at_ms);
  std::lock_guard lock(ingest_mu_);
  if (closed_) throw SessionClosed("session " + id_ + " is closed");
  if (!pending_.empty()) {
    if (!pending_.back().image().same_shape(frame.image())) {
      spdlog::warn("session {}: frame size changed, discarding {} pending frame(s)", id_, pending_.size());
      pending_.clear();
      pending_originals_.clear();
    } else if (frame.timestamp_ms() <= pending_.back().timestamp_ms()) {
      frame = GrayFrame(frame.image(), pending_.back().timestamp_ms() + 1);
    }
  }
  pending_.push_back(std::move(frame));
  pending_originals_.push_back(std::move(original));
  if (pending_.size() < static_cast<std::size_t>(cfg_.batch_size)) return std::nullopt;

  FrameBatch batch;
  batch.frames = std::move(pending_);
  batch.batch_index = next_index_++;
  batch.formed_at_ms = batch.frames.back().timestamp_ms();
  for (auto& o : pending_originals_) {
    if (!o.bytes.empty()) batch.originals.push_back(std::move(o));
  }
  pending_.clear();
  pending_originals_.clear();
  return batch;
}

Analysis Session::analyze(const FrameBatch& batch) const noexcept {
  Analysis out;
  try {
    out.features = extract_features(batch, cfg_.flow);
    out.branch = deps_.model->classify(out.features).branch;
  } catch (const std::exception& e) {
    spdlog::warn("session {} batch {}: feature extraction failed: {}", id_, batch.batch_index, e.what());
    return out;
  }
  try {
    auto scene = interpret(deps_.interpreter, batch.originals, out.branch, *deps_.clock);
    if (succeeded(scene)) {
      out.scene = std::get<SceneResponse>(std::move(scene));
    } else {
      const auto& f = std::get<BackendFailure>(scene);
      spdlog::warn("session {} batch {}: interpreter {}: {}", id_, batch.batch_index, to_string(f.kind), f.message);
    }
  } catch (const std::exception& e) {
    spdlog::warn("session {} batch {}: interpreter error: {}", id_, batch.batch_index, e.what());
  }
  return out;
}

void Session::fill_cache_in_background(const std::string& text, std::uint64_t batch_index) {
  const std::string key = key_of(text).hex;
  {
    std::lock_guard lock(*fills_mu_);
    if (!fills_->insert(key).second) return;
  }
  deps_.background->post([synth = deps_.synth, cache = deps_.cache, log = deps_.log, clock = deps_.clock,
                          fills_mu = fills_mu_, fills = fills_, text, key, batch_index, id = id_] {
    bool ok = false;
    try {
      auto made = synthesize(synth, AudioCategory::sfx, text, *clock);
      if (succeeded(made)) {
        cache->put(text, std::get<AudioClip>(made));
        ok = true;
      } else {
        spdlog::warn("session {} batch {}: cache fill failed: {}", id, batch_index,
                     std::get<BackendFailure>(made).message);
      }
    } catch (const std::exception& e) {
      spdlog::warn("session {} batch {}: cache fill failed: {}", id, batch_index, e.what());
    }
    log->cache_fill(batch_index, key, clock->now_ms(), ok);
    std::lock_guard lock(*fills_mu);
    fills->erase(key);
  });
}

std::vector<EmissionEvent> Session::emit(const FrameBatch& batch, const Analysis& analysis) noexcept {
  std::lock_guard lock(emit_mu_);
  Clock& clock = *deps_.clock;
  if (closed()) {
    deps_.log->drop(batch.batch_index, clock.now_ms(), "session_closed");
    return {};
  }
  EmissionEvent ev;
  ev.batch_index = batch.batch_index;
  ev.t_batch = batch.formed_at_ms;
  ev.t_decision = std::max(clock.now_ms(), ev.t_batch);
  try {
    if (analysis.scene) ev.category = analysis.scene->category;
    if (ev.category == AudioCategory::none) {
      ev.decision = EmissionDecision::skip_none;
      deps_.log->emission(ev);
      return {ev};
    }
    const std::string& text = analysis.scene->content;
    const bool throttled = should_throttle(throttle_, ev.category, ev.t_decision, cfg_.policy);
    ev.decision = decide(ev.category, deps_.cache->contains(text), throttled);

    std::optional<AudioClip> clip;
    if (ev.decision == EmissionDecision::play_cached) {
      clip = deps_.cache->get(text);
      if (!clip) ev.decision = decide(ev.category, false, false);  // evicted since the lookup
    }
    if (ev.decision == EmissionDecision::synthesize_and_play) {
      auto made = synthesize(deps_.synth, ev.category, text, clock);
      if (succeeded(made)) {
        clip = std::get<AudioClip>(std::move(made));
        deps_.cache->put(text, *clip);
      } else {
        const auto& f = std::get<BackendFailure>(made);
        spdlog::warn("session {} batch {}: synthesis {}: {}", id_, batch.batch_index, to_string(f.kind), f.message);
        ev.decision = EmissionDecision::skip_none;
      }
    }
    if (ev.decision == EmissionDecision::synthesize_and_cache_only) {
      ev.clip_key = key_of(text).hex;
      fill_cache_in_background(text, batch.batch_index);
    }
    if (clip && is_played(ev.decision)) {
      ev.clip_key = key_of(text).hex;
      record_playback(throttle_, ev.category, ev.t_decision);
      clip->batch_index = batch.batch_index;
      clip->category = ev.category;
      bool sent = true;
      if (deps_.sink) {
        try {
          deps_.sink->deliver(*clip, text);
        } catch (const std::exception& e) {
          spdlog::warn("session {}: audio delivery failed, closing: {}", id_, e.what());
          sent = false;
        }
      }
      if (sent) ev.t_sent = std::max(clock.now_ms(), ev.t_decision);
      if (!sent) close();
    }
  } catch (const std::exception& e) {
    spdlog::error("session {} batch {}: {}", id_, batch.batch_index, e.what());
    ev.decision = EmissionDecision::skip_none;
    ev.clip_key.reset();
    ev.t_sent.reset();
  }
  try {
    deps_.log->emission(ev);
  } catch (const std::exception& e) {
    spdlog::error("session {}: event log write failed: {}", id_, e.what());
  }
  return {ev};
}

void Session::close() {
  std::lock_guard lock(ingest_mu_);
  closed_ = true;
}

bool Session::closed() const {
  std::lock_guard lock(ingest_mu_);
  return closed_;
}

SessionRunner::SessionRunner(std::shared_ptr<Session> session) : session_(std::move(session)) {
  const int k = session_->config().max_in_flight;
  for (int i = 0; i < k; ++i) workers_.emplace_back([this] { worker(); });
}

SessionRunner::~SessionRunner() { close(); }

void SessionRunner::offer_frame(const GrayImage& image, Millis received_at_ms, EncodedFrame original) {
  auto batch = session_->ingest_frame(image, received_at_ms, std::move(original));
  if (batch) offer_batch(std::move(*batch));
}

void SessionRunner::offer_batch(FrameBatch batch) {
  auto& log = *session_->deps().log;
  const Millis now = session_->deps().clock->now_ms();
  {
    std::lock_guard lock(mu_);
    if (stopping_) {
      log.drop(batch.batch_index, now, "session_closed");
      ++dropped_;
      return;
    }
    const auto cap = static_cast<std::size_t>(session_->config().max_in_flight);
    if (queue_.size() + running_ >= cap) {
      ++dropped_;
      if (queue_.empty()) {
        log.drop(batch.batch_index, now, "backpressure");
        return;
      }
      log.drop(queue_.front().batch_index, now, "backpressure");
      queue_.pop_front();
    }
    queue_.push_back(std::move(batch));
  }
  work_.release();
}

void SessionRunner::worker() {
#ifdef __linux__
  // batch work yields to frame ingestion, which matters on one or two cores
  sched_param sp{};
  pthread_setschedparam(pthread_self(), SCHED_BATCH, &sp);
  setpriority(PRIO_PROCESS, static_cast<id_t>(gettid()), kWorkerNice);
#endif
  for (;;) {
    work_.acquire();
    FrameBatch batch;
    {
      std::lock_guard lock(mu_);
      if (queue_.empty()) {
        if (stopping_) return;
        continue;  // token of an evicted batch
      }
      batch = std::move(queue_.front());
      queue_.pop_front();
      ++running_;
    }
    const Analysis analysis = session_->analyze(batch);
    session_->emit(batch, analysis);
    {
      std::lock_guard lock(mu_);
      --running_;
      ++processed_;
    }
    idle_cv_.notify_all();
  }
}

void SessionRunner::stop_workers() {
  {
    std::lock_guard lock(mu_);
    if (stopping_ && workers_.empty()) return;
    stopping_ = true;
  }
  work_.release(static_cast<std::ptrdiff_t>(workers_.size()));
  for (auto& t : workers_) {
    if (t.joinable()) t.join();
  }
  workers_.clear();
}

void SessionRunner::finish() {
  {
    std::unique_lock lock(mu_);
    idle_cv_.wait(lock, [&] { return queue_.empty() && running_ == 0; });
  }
  stop_workers();
  session_->close();
}

void SessionRunner::close() {
  session_->close();
  {
    std::lock_guard lock(mu_);
    const Millis now = session_->deps().clock->now_ms();
    for (const auto& b : queue_) {
      session_->deps().log->drop(b.batch_index, now, "session_closed");
      ++dropped_;
    }
    queue_.clear();
  }
  stop_workers();
}

std::uint64_t SessionRunner::processed() const {
  std::lock_guard lock(mu_);
  return processed_;
}

std::uint64_t SessionRunner::dropped() const {
  std::lock_guard lock(mu_);
  return dropped_;
}

RunSummary run_session(const std::shared_ptr<Session>& session, FrameSource& source, bool drain) {
  SessionRunner runner(session);
  Clock& clock = *session->deps().clock;
  while (auto frame = source.next()) {
    try {
      runner.offer_frame(frame->image, clock.now_ms(), std::move(frame->original));
    } catch (const SessionClosed&) {
      break;
    } catch (const std::exception& e) {
      spdlog::warn("session {}: frame rejected: {}", session->id(), e.what());
    }
  }
  if (drain) {
    runner.finish();
  } else {
    runner.close();
  }
  session->deps().log->flush();
  return {runner.processed(), runner.dropped()};
}

}  // namespace amava
