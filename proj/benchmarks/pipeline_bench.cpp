#include <benchmark/benchmark.h>

#include "amava/cache.hpp"
#include "amava/classifier.hpp"
#include "amava/motion.hpp"
#include "amava/synthetic.hpp"
#include "amava/training.hpp"

using namespace amava;

static void BM_Flow(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto pair = synthetic::make_translating_pair(side, side * 3 / 4, 3.0, 1.5, 11);
  const FlowParams params;
  for (auto _ : state) benchmark::DoNotOptimize(compute_flow(pair.first, pair.second, params));
  state.SetLabel(std::to_string(side) + "x" + std::to_string(side * 3 / 4));
}
BENCHMARK(BM_Flow)->Arg(160)->Arg(320)->Unit(benchmark::kMillisecond);

static void BM_Features(benchmark::State& state) {
  const auto pair = synthetic::make_translating_pair(640, 480, 4.0, 0.0, 3);
  FrameBatch batch;
  batch.frames = {GrayFrame(downscale_to_max_side(pair.first, kFeatureMaxSide), 0),
                  GrayFrame(downscale_to_max_side(pair.second, kFeatureMaxSide), 500)};
  for (auto _ : state) benchmark::DoNotOptimize(extract_features(batch, FlowParams{}));
}
BENCHMARK(BM_Features)->Unit(benchmark::kMillisecond);

static void BM_Classify(benchmark::State& state) {
  const MlpParams params = init_params(5);
  const Scaler scaler{{20.0, 2.0}, {15.0, 2.0}};
  MotionFeatures f{12.5, 1.25};
  for (auto _ : state) {
    benchmark::DoNotOptimize(classify(params, scaler, f));
    f.frame_diff += 1e-9;
  }
}
BENCHMARK(BM_Classify);

static void BM_TrainEpochs(benchmark::State& state) {
  const auto data = synthetic::separable_dataset(200, 7);
  TrainConfig cfg;
  cfg.max_epochs = 10;
  cfg.patience = 100;
  for (auto _ : state) benchmark::DoNotOptimize(train(data, cfg));
}
BENCHMARK(BM_TrainEpochs)->Unit(benchmark::kMillisecond);

static void BM_KeyOf(benchmark::State& state) {
  const std::string text = "Car approaching quickly from the LEFT, step back!";
  for (auto _ : state) benchmark::DoNotOptimize(key_of(text));
}
BENCHMARK(BM_KeyOf);
BENCHMARK_MAIN();
