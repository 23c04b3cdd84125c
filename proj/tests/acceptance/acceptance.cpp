// Prints one PASS/FAIL line per acceptance criterion; exit status 1 if any fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "amava/cache.hpp"
#include "amava/classifier.hpp"
#include "amava/metrics.hpp"
#include "amava/motion.hpp"
#include "amava/policy.hpp"
#include "amava/session.hpp"
#include "amava/synthetic.hpp"
#include "amava/training.hpp"
#include "fixtures.hpp"

using namespace amava;
using namespace amava::testing;
using C = AudioCategory;
using D = EmissionDecision;

namespace {

// Collects failed expectations for one criterion.
struct Check {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

std::string num(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

GrayImage random_image(int w, int h, std::mt19937_64& rng) {
  GrayImage img(w, h);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng() & 0xff);
  return img;
}

void feature_math(Check& c) {
  std::mt19937_64 rng(11);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const int w = 16 + static_cast<int>(rng() % 100);
    const int h = 16 + static_cast<int>(rng() % 80);
    const auto a = random_image(w, h, rng);
    const auto b = random_image(w, h, rng);
    double sum = 0;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) sum += std::abs(double(b.at(x, y)) - double(a.at(x, y)));
    worst = std::max(worst, std::abs(frame_difference(a, b) - sum / (double(w) * h)));
  }
  c.expect(worst <= 1e-9, "frame_difference off naive loop by " + num(worst));

  const auto tex = synthetic::make_translating_pair(96, 72, 0, 0, 5).first;
  c.expect(frame_difference(tex, tex) == 0.0, "identical frames give nonzero difference");
  const double m0 = mean_flow_magnitude(compute_flow(tex, tex, FlowParams{}));
  c.expect(m0 < 1e-3, "identical frames give flow " + num(m0));

  const FlowParams p;
  const auto pair = synthetic::make_translating_pair(128, 128, 3.0, 0.0, 42);
  const auto flow = compute_flow(pair.first, pair.second, p);
  double sum = 0;
  int n = 0;
  for (int y = p.window_size; y < flow.height - p.window_size; ++y) {
    for (int x = p.window_size; x < flow.width - p.window_size; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * flow.width + x;
      sum += std::hypot(flow.u[i], flow.v[i]);
      ++n;
    }
  }
  const double interior = sum / n;
  c.expect(interior >= 2.4 && interior <= 3.6, "3 px shift gives interior magnitude " + num(interior));
}

void classifier(Check& c) {
  const auto data = synthetic::separable_dataset(200, 7);
  TrainConfig cfg;
  cfg.seed = 7;
  cfg.max_epochs = 300;
  const auto a = train(data, cfg);
  const auto b = train(data, cfg);
  c.expect(a.report.test_accuracy >= 0.95, "test accuracy " + num(a.report.test_accuracy));
  c.expect(a.report.test_accuracy == b.report.test_accuracy && a.report.epochs.size() == b.report.epochs.size(),
           "training is not deterministic");

  // gradient check
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd(0.0, 0.7);
  MlpParams p;
  std::vector<double*> entries;
  for (auto* m : {&p.w1, &p.w2, &p.w3})
    for (Eigen::Index i = 0; i < m->size(); ++i) entries.push_back(m->data() + i);
  for (auto* v : {&p.b1, &p.b2, &p.b3})
    for (Eigen::Index i = 0; i < v->size(); ++i) entries.push_back(v->data() + i);
  for (double* e : entries) *e = nd(rng);
  std::vector<ScaledFeatures> x;
  std::vector<MovementClass> y;
  std::normal_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 12; ++i) {
    x.push_back({unit(rng), unit(rng)});
    y.push_back(static_cast<MovementClass>(i % 3));
  }
  const auto analytic = loss_and_gradient(p, x, y, 1e-3);
  MlpParams g = analytic.grad;
  std::vector<double*> grads;
  for (auto* m : {&g.w1, &g.w2, &g.w3})
    for (Eigen::Index i = 0; i < m->size(); ++i) grads.push_back(m->data() + i);
  for (auto* v : {&g.b1, &g.b2, &g.b3})
    for (Eigen::Index i = 0; i < v->size(); ++i) grads.push_back(v->data() + i);
  double worst = 0;
  const double h = 1e-4;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const double saved = *entries[k];
    *entries[k] = saved + h;
    const double up = loss_and_gradient(p, x, y, 1e-3).loss;
    *entries[k] = saved - h;
    const double down = loss_and_gradient(p, x, y, 1e-3).loss;
    *entries[k] = saved;
    const double numeric = (up - down) / (2 * h);
    worst = std::max(worst, std::abs(numeric - *grads[k]) / std::max({std::abs(numeric), std::abs(*grads[k]), 1e-6}));
  }
  c.expect(worst <= 1e-3, "gradient relative error " + num(worst));

  // early stopping against a validation curve with its minimum at k
  const auto small = synthetic::separable_dataset(30, 3);
  for (int k : {1, 4, 9}) {
    for (int patience : {1, 3, 5}) {
      TrainConfig ec;
      ec.patience = patience;
      ec.max_epochs = 100;
      TrainHooks hooks;
      hooks.validation_loss = [k](int epoch, const MlpParams&) {
        return epoch <= k ? 10.0 - epoch : 10.0 - k + (epoch - k);
      };
      const auto r = train(small, ec, hooks);
      c.expect(static_cast<int>(r.report.epochs.size()) == k + patience,
               "early stop at " + std::to_string(r.report.epochs.size()) + " for k=" + std::to_string(k) +
                   " patience=" + std::to_string(patience));
    }
  }

  const auto clips = synthetic::clip_corpus(160, 120, 20, 99);
  int correct = 0;
  for (const auto& clip : clips) {
    FrameBatch fb;
    fb.frames = {GrayFrame(clip.frames.first, 0), GrayFrame(clip.frames.second, 500)};
    correct += classify(a.params, a.scaler, extract_features(fb, FlowParams{})).branch == branch_of(clip.label);
  }
  c.expect(clips.size() == 40 && correct >= 38, "clip branch accuracy " + std::to_string(correct) + "/40");
}

void policy(Check& c) {
  struct Row {
    C category;
    bool cached, throttled;
    D expected;
  };
  const std::vector<Row> table{
      {C::description, false, false, D::synthesize_and_play}, {C::description, false, true, D::skip_throttled},
      {C::description, true, false, D::play_cached},          {C::description, true, true, D::skip_throttled},
      {C::hazard, false, false, D::synthesize_and_play},      {C::hazard, false, true, D::skip_throttled},
      {C::hazard, true, false, D::play_cached},               {C::hazard, true, true, D::skip_throttled},
      {C::sfx, false, false, D::synthesize_and_cache_only},   {C::sfx, false, true, D::skip_throttled},
      {C::sfx, true, false, D::play_cached},                  {C::sfx, true, true, D::skip_throttled},
      {C::none, false, false, D::skip_none},                  {C::none, false, true, D::skip_none},
      {C::none, true, false, D::skip_none},                   {C::none, true, true, D::skip_none},
  };
  for (const auto& r : table) {
    c.expect(decide(r.category, r.cached, r.throttled) == r.expected,
             "decide(" + std::string(to_string(r.category)) + ", " + std::to_string(r.cached) + ", " +
                 std::to_string(r.throttled) + ")");
  }

  const PolicyConfig cfg;
  const std::vector<C> cats{C::description, C::hazard, C::sfx, C::none};
  std::mt19937_64 rng(2024);
  std::size_t violations = 0, cache_then_play = 0, sfx_uncached_play = 0;
  for (int seq = 0; seq < 10000; ++seq) {
    ThrottleState state;
    std::set<std::string> cache;
    std::optional<Millis> last_tts;
    std::map<C, Millis> last;
    Millis t = 0;
    const int n = 5 + static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) {
      t += static_cast<Millis>(rng() % 2500);
      const C cat = cats[rng() % cats.size()];
      const std::string text = std::string(to_string(cat)) + std::to_string(rng() % 4);
      const bool cached = cache.contains(text);
      const bool throttled = cat != C::none && should_throttle(state, cat, t, cfg);
      const D d = decide(cat, cached, throttled);
      if (d == D::synthesize_and_play || d == D::synthesize_and_cache_only) cache.insert(text);
      if (!is_played(d)) continue;
      record_playback(state, cat, t);
      if (cat == C::sfx) {
        if (cached) ++cache_then_play;
        else ++sfx_uncached_play;
      }
      if (is_tts_category(cat)) {
        if (last_tts && t - *last_tts < cfg.shared_tts_ms) ++violations;
        last_tts = t;
      }
      if (last.contains(cat) && t - last[cat] < cfg.throttle_for(cat)) ++violations;
      last[cat] = t;
    }
  }
  c.expect(violations == 0, std::to_string(violations) + " spacing violations");
  c.expect(sfx_uncached_play == 0, "sfx played without a cached clip");
  c.expect(cache_then_play > 0, "no cache-only sfx was later played");
}

void cache(Check& c) {
  TempDir dir;
  auto clock = std::make_shared<SteadyClock>();
  auto synth = std::make_shared<MockSynth>(clock);
  {
    AudioCache store(dir.path());
    for (int i = 0; i < 50; ++i) {
      const auto out = fetch_or_synthesize(store, synth, C::sfx, "dog barking", *clock);
      c.expect(succeeded(out), "fetch failed at repeat " + std::to_string(i));
    }
  }
  c.expect(synth->calls() == 1, std::to_string(synth->calls()) + " synthesis calls for 50 repeats");
  c.expect(key_of("Hello, World!").hex == "b94d27b9934d3e08a52e52d7da7dabfac484efe37a5380ee9088f7ace2efcde9",
           "key_of(\"Hello, World!\") is not sha256(\"hello world\")");

  std::map<std::string, std::vector<std::uint8_t>> stored;
  {
    AudioCache store(dir.path());
    for (int i = 0; i < 10; ++i) {
      const std::string text = "clip " + std::to_string(i);
      auto clip = synth->tts(text + " words");
      store.put(text, clip);
      stored[text] = clip.bytes;
    }
  }
  AudioCache reopened(dir.path());
  for (const auto& [text, bytes] : stored) {
    const auto hit = reopened.get(text);
    c.expect(hit && hit->bytes == bytes, "'" + text + "' changed across restart");
  }
  const auto hit = reopened.get("dog barking");
  c.expect(hit.has_value(), "first clip lost across restart");
}

void golden(Check& c) {
  TempDir a, b;
  const auto first = run_golden(a.path());
  const auto second = run_golden(b.path());
  const auto expected = golden_expected();
  c.expect(first.events == expected, "event sequence differs from the hand-derived trace");
  c.expect(first.events == second.events && first.log_text == second.log_text, "two runs differ");
  std::set<C> cats;
  for (const auto& e : first.events) cats.insert(e.category);
  c.expect(cats.size() == 4, "not every category appears");
  bool cache_only_then_played = false;
  for (std::size_t i = 0; i < first.events.size(); ++i) {
    if (first.events[i].decision != D::synthesize_and_cache_only) continue;
    for (std::size_t j = i + 1; j < first.events.size(); ++j)
      cache_only_then_played |= first.events[j].decision == D::play_cached &&
                                first.events[j].clip_key == first.events[i].clip_key;
  }
  c.expect(cache_only_then_played, "no cache-only sfx followed by its cached playback");
  c.expect(std::any_of(first.events.begin(), first.events.end(),
                       [](const EmissionEvent& e) { return e.category == C::hazard && e.decision == D::skip_throttled; }),
           "no throttled hazard");
}

void non_blocking(Check& c) {
  TempDir dir;
  auto clock = std::make_shared<ScaledClock>(5.0);
  std::vector<MockInterpreter::Entry> script;
  for (int i = 0; i < 10; ++i) script.push_back({MockInterpreter::Pattern::high, "hazard: obstacle " + std::to_string(i)});
  auto log = std::make_shared<MemoryEventLog>();
  SessionDeps deps;
  deps.model = std::make_shared<const MotionModel>(threshold_model());
  deps.interpreter = std::make_shared<MockInterpreter>(script, clock, 0, 5000);
  deps.synth = std::make_shared<MockSynth>(clock, 5000, 6000);
  deps.cache = std::make_shared<AudioCache>(dir.path() / "cache");
  deps.log = log;
  deps.clock = clock;
  deps.background = std::make_shared<InlineExecutor>();
  PipelineConfig cfg;
  cfg.max_in_flight = 2;
  cfg.policy = {0, 0, 0, 0};
  SessionRunner runner(std::make_shared<Session>("accept", cfg, deps));

  const auto frames = frame_script(std::vector<bool>(10, true), 640, 70);
  std::chrono::nanoseconds worst{0};
  for (std::size_t k = 0; k < frames.size(); ++k) {
    clock->sleep_until(static_cast<Millis>(k) * 500);
    const auto start = std::chrono::steady_clock::now();
    runner.offer_frame(frames[k], clock->now_ms());
    worst = std::max(worst, std::chrono::steady_clock::now() - start);
  }
  runner.finish();
  const double worst_ms = std::chrono::duration<double, std::milli>(worst).count();
  c.expect(worst_ms < 10.0, "slowest frame ingest " + num(worst_ms) + " ms");
  c.expect(runner.processed() >= 2, "only " + std::to_string(runner.processed()) + " batches processed");
  c.expect(runner.dropped() >= 1, "nothing dropped beyond the in-flight cap");
  c.expect(runner.processed() + runner.dropped() == 10, "batches unaccounted for");
  c.expect(log->count_type("drop") == runner.dropped(), "drops not logged");
}

void metrics(Check& c) {
  TempDir dir;
  const auto run = run_golden(dir.path() / "cache");
  std::istringstream in(run.log_text);
  const auto r = analyze(in);
  c.expect(r.reordering_rate == 0.0, "reordering rate " + num(r.reordering_rate));
  const PolicyConfig policy;
  for (auto cat : {C::description, C::hazard, C::sfx}) {
    const auto it = r.gaps.find(cat);
    c.expect(it != r.gaps.end() && it->second.samples > 0, std::string(to_string(cat)) + " has no gap samples");
    if (it == r.gaps.end()) continue;
    c.expect(it->second.mean_s * 1000.0 >= static_cast<double>(policy.throttle_for(cat)) - 1.0,
             std::string(to_string(cat)) + " mean gap " + num(it->second.mean_s) + " s below floor");
  }
  std::map<C, Millis> last;
  for (const auto& e : run.events) {
    if (!is_played(e.decision)) continue;
    if (last.contains(e.category))
      c.expect(*e.t_sent - last[e.category] >= policy.throttle_for(e.category) - 1,
               "batch " + std::to_string(e.batch_index) + " played inside its throttle window");
    last[e.category] = *e.t_sent;
  }
}

struct Criterion {
  const char* name;
  double limit_s;
  std::function<void(Check&)> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"feature-math", 30, feature_math},
      {"classifier", 120, classifier},
      {"emission-policy", 30, policy},
      {"audio-cache", 60, cache},
      {"golden-trace", 60, golden},
      {"non-blocking", 60, non_blocking},
      {"metrics", 60, metrics},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      cr.run(check);
    } catch (const std::exception& e) {
      check.failures.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > cr.limit_s) check.failures.push_back("took " + num(secs) + " s, limit " + num(cr.limit_s) + " s");
    if (check.failures.empty()) {
      std::printf("PASS %s (%.2f s)\n", cr.name, secs);
    } else {
      ++failed;
      std::printf("FAIL %s (%.2f s): %s", cr.name, secs, check.failures.front().c_str());
      if (check.failures.size() > 1) std::printf(" (+%zu more)", check.failures.size() - 1);
      std::printf("\n");
    }
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
