#include "fixtures.hpp"

#include <random>

#include "amava/synthetic.hpp"

namespace amava::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  std::random_device rd;
  path_ = fs::temp_directory_path() / ("amava-test-" + std::to_string(rd()) + std::to_string(rd()));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

MotionModel threshold_model(double t) {
  MotionModel m;
  auto& p = m.params;
  p.w1(0, 1) = 1.0;
  p.b1(0) = -t;
  p.w1(1, 1) = -1.0;
  p.b1(1) = t;
  p.w2(0, 0) = 1.0;
  p.w2(1, 1) = 1.0;
  p.w3(2, 0) = 100.0;  // high
  p.w3(0, 1) = 100.0;  // low
  return m;
}

PairImages static_pair(int side, std::uint64_t seed) {
  auto p = synthetic::make_static_pair(side, side, 1.0, seed);
  return {std::move(p.first), std::move(p.second)};
}

PairImages moving_pair(int side, std::uint64_t seed, double shift) {
  auto p = synthetic::make_translating_pair(side, side, shift, 0.0, seed);
  return {std::move(p.first), std::move(p.second)};
}

std::vector<ScriptedBatch> golden_script() {
  using P = MockInterpreter::Pattern;
  const std::string office = "quiet office with two desks";
  return {
      {false, P::low, office},
      {true, P::high, "sfx: passing car"},
      {true, P::high, "hazard: car approaching from left"},
      {true, P::high, "none"},
      {true, P::high, "sfx: passing car"},
      {true, P::high, "hazard: car approaching from left"},
      {true, P::high, "sfx: passing car"},
      {true, P::high, "sfx: passing car"},
      {false, P::low, office},
      {true, P::high, "description: crosswalk ahead with signal"},
      {true, P::high, "hazard: cyclist ahead"},
      {true, P::high, "sfx: dog barking"},
      {true, P::high, "sfx: dog barking"},
      {true, P::high, "HAZARD:  cyclist ahead "},
      {false, P::low, office},
      {false, P::low, office},
      {true, P::high, "the scene is pleasant"},
      {true, P::high, "hazard: stairs descending ahead"},
      {true, P::high, "sfx: passing car"},
      {true, P::high, "hazard: stairs descending ahead"},
  };
}

GoldenRun run_golden(const fs::path& cache_dir) {
  const auto script = golden_script();
  std::vector<MockInterpreter::Entry> entries;
  for (const auto& b : script) entries.push_back({b.pattern, b.response, -1, false});

  auto clock = std::make_shared<ManualClock>(0);
  auto log = std::make_shared<MemoryEventLog>();
  auto synth = std::make_shared<MockSynth>(clock);
  SessionDeps deps;
  deps.model = std::make_shared<const MotionModel>(threshold_model());
  deps.interpreter = std::make_shared<MockInterpreter>(entries, clock);
  deps.synth = synth;
  deps.cache = std::make_shared<AudioCache>(cache_dir);
  deps.log = log;
  deps.clock = clock;
  deps.background = std::make_shared<InlineExecutor>();
  Session session("golden", PipelineConfig{}, deps);

  GoldenRun run;
  for (std::size_t i = 0; i < script.size(); ++i) {
    const auto frames = script[i].moving ? moving_pair(64, 100 + i) : static_pair(64, 100 + i);
    const auto t0 = static_cast<Millis>(1000 * i);
    clock->set(t0);
    session.ingest_frame(frames.first, t0);
    clock->set(t0 + 500);
    auto batch = session.ingest_frame(frames.second, t0 + 500);
    for (auto& e : session.process_batch(*batch)) run.events.push_back(e);
  }
  run.log_text = log->text();
  run.synth_calls = synth->calls();
  return run;
}

std::vector<EmissionEvent> golden_expected() {
  using C = AudioCategory;
  using D = EmissionDecision;
  struct Row {
    C category;
    D decision;
    std::string text;  // synthesized text, empty when no clip is involved
  };
  const std::vector<Row> rows = {
      {C::description, D::synthesize_and_play, "quiet office with two desks"},
      {C::sfx, D::synthesize_and_cache_only, "passing car"},
      {C::hazard, D::skip_throttled, ""},  // shared speech timer: 2000 ms after b0
      {C::none, D::skip_none, ""},
      {C::sfx, D::play_cached, "passing car"},
      {C::hazard, D::synthesize_and_play, "car approaching from left"},
      {C::sfx, D::skip_throttled, ""},  // 2000 ms after b4
      {C::sfx, D::play_cached, "passing car"},
      {C::description, D::skip_throttled, ""},
      {C::description, D::skip_throttled, ""},
      {C::hazard, D::synthesize_and_play, "cyclist ahead"},
      {C::sfx, D::synthesize_and_cache_only, "dog barking"},
      {C::sfx, D::play_cached, "dog barking"},
      {C::hazard, D::skip_throttled, ""},
      {C::description, D::skip_throttled, ""},  // 14000 ms after b0
      {C::description, D::play_cached, "quiet office with two desks"},
      {C::none, D::skip_none, ""},
      {C::hazard, D::skip_throttled, ""},  // shared speech timer: 2000 ms after b15
      {C::sfx, D::play_cached, "passing car"},
      {C::hazard, D::synthesize_and_play, "stairs descending ahead"},
  };
  std::vector<EmissionEvent> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EmissionEvent e;
    e.batch_index = i;
    e.category = rows[i].category;
    e.decision = rows[i].decision;
    e.t_batch = static_cast<Millis>(1000 * i + 500);
    e.t_decision = e.t_batch;
    if (!rows[i].text.empty()) e.clip_key = key_of(rows[i].text).hex;
    if (is_played(e.decision)) e.t_sent = e.t_batch;
    out.push_back(e);
  }
  return out;
}

void RecordingSink::deliver(const AudioClip& clip, const std::string& caption) {
  std::lock_guard lock(mu_);
  items_.emplace_back(clip, caption);
}

std::vector<std::pair<AudioClip, std::string>> RecordingSink::items() const {
  std::lock_guard lock(mu_);
  return items_;
}

TimedFrameSource::TimedFrameSource(std::shared_ptr<Clock> clock, std::vector<GrayImage> frames, Millis period_ms,
                                   Millis tail_ms)
    : clock_(std::move(clock)), frames_(std::move(frames)), period_ms_(period_ms), tail_ms_(tail_ms) {}

std::optional<SourceFrame> TimedFrameSource::next() {
  if (next_ >= frames_.size()) {
    if (tail_ms_ > 0) clock_->sleep_until(static_cast<Millis>(frames_.size() - 1) * period_ms_ + tail_ms_);
    return std::nullopt;
  }
  clock_->sleep_until(static_cast<Millis>(next_) * period_ms_);
  return SourceFrame{frames_[next_++], {}};
}

std::vector<GrayImage> frame_script(const std::vector<bool>& moving, int side, std::uint64_t seed) {
  std::vector<GrayImage> frames;
  for (std::size_t i = 0; i < moving.size(); ++i) {
    auto p = moving[i] ? moving_pair(side, seed + i) : static_pair(side, seed + i);
    frames.push_back(std::move(p.first));
    frames.push_back(std::move(p.second));
  }
  return frames;
}

}  // namespace amava::testing
