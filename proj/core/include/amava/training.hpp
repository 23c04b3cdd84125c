#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "amava/classifier.hpp"

namespace amava {

struct LabeledRow {
  MotionFeatures features;
  MovementClass label = MovementClass::low;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  double weight_decay = 1e-5;
  int batch_size = 64;
  int patience = 5;
  int max_epochs = 200;
  std::uint64_t seed = 0;
  double dropout = 0.5;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double validation_loss = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_validation_loss = 0.0;
  double test_accuracy = 0.0;
  std::size_t train_rows = 0;
  std::size_t validation_rows = 0;
  std::size_t test_rows = 0;
};

struct TrainResult {
  MlpParams params;
  Scaler scaler;
  TrainReport report;
};

// Optional overrides for tests. When set, `validation_loss` replaces the
// computed validation loss for early stopping and model selection.
struct TrainHooks {
  std::function<double(int epoch, const MlpParams&)> validation_loss;
};

struct DatasetSplit {
  std::vector<LabeledRow> train;
  std::vector<LabeledRow> validation;
  std::vector<LabeledRow> test;
};

// Per-class 60/20/20 split after a seeded shuffle.
DatasetSplit stratified_split(std::span<const LabeledRow> rows, std::uint64_t seed);

// He-uniform weights, zero biases.
MlpParams init_params(std::uint64_t seed);

// Mean cross-entropy plus 0.5 * l2 * |theta|^2 over the rows, and its exact
// gradient. `dropout_masks`, if given, holds one 0/scale multiplier vector of
// size kHidden1 per row applied after the first hidden layer.
struct LossGradient {
  double loss = 0.0;
  MlpParams grad;
};
LossGradient loss_and_gradient(const MlpParams& p, std::span<const ScaledFeatures> x,
                               std::span<const MovementClass> y, double l2,
                               std::span<const Eigen::VectorXd> dropout_masks = {});

double cross_entropy(const MlpParams& p, const Scaler& s, std::span<const LabeledRow> rows);
double accuracy(const MlpParams& p, const Scaler& s, std::span<const LabeledRow> rows);

// Rounds every parameter to the nearest float32 so that the model container
// stores it exactly.
void round_to_float(MlpParams& p);
void round_to_float(Scaler& s);

TrainResult train(std::span<const LabeledRow> data, const TrainConfig& cfg, const TrainHooks& hooks = {});

// CSV with header `frame_diff,flow_mag,label`.
std::vector<LabeledRow> read_dataset_csv(const std::string& path);
void write_dataset_csv(const std::string& path, std::span<const LabeledRow> rows);

}  // namespace amava
