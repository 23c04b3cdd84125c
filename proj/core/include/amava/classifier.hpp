#pragma once

#include <Eigen/Core>

#include <array>
#include <span>

#include "amava/motion.hpp"
#include "amava/types.hpp"

namespace amava {

// Per-feature standardisation (population standard deviation).
struct Scaler {
  std::array<double, 2> mean{0.0, 0.0};
  std::array<double, 2> std{1.0, 1.0};
};

struct ScaledFeatures {
  double frame_diff = 0.0;
  double flow_mag = 0.0;
};

// Weights of the 2 -> 32 -> 16 -> 3 network. Rows index output units.
struct MlpParams {
  static constexpr int kInput = 2;
  static constexpr int kHidden1 = 32;
  static constexpr int kHidden2 = 16;
  static constexpr int kOutput = 3;

  Eigen::MatrixXd w1 = Eigen::MatrixXd::Zero(kHidden1, kInput);
  Eigen::VectorXd b1 = Eigen::VectorXd::Zero(kHidden1);
  Eigen::MatrixXd w2 = Eigen::MatrixXd::Zero(kHidden2, kHidden1);
  Eigen::VectorXd b2 = Eigen::VectorXd::Zero(kHidden2);
  Eigen::MatrixXd w3 = Eigen::MatrixXd::Zero(kOutput, kHidden2);
  Eigen::VectorXd b3 = Eigen::VectorXd::Zero(kOutput);

  bool all_finite() const;
  bool has_expected_shapes() const;
};

using Probabilities = std::array<double, 3>;  // indexed by MovementClass

Scaler scaler_fit(std::span<const MotionFeatures> rows);
ScaledFeatures scaler_transform(const Scaler& s, const MotionFeatures& f);

// Pre-softmax scores; dropout is never applied here.
std::array<double, 3> logits(const MlpParams& p, const ScaledFeatures& x);
Probabilities softmax(const std::array<double, 3>& z);
Probabilities forward(const MlpParams& p, const ScaledFeatures& x);

struct Classification {
  MovementClass movement = MovementClass::low;
  Branch branch = Branch::low;
  Probabilities probabilities{};
};

// Argmax with ties resolved toward the higher-movement class.
MovementClass argmax_class(const std::array<double, 3>& scores);
Branch branch_of(MovementClass c);

Classification classify(const MlpParams& p, const Scaler& s, const MotionFeatures& f);

// Read-only classifier bundle shared by pipeline workers.
struct MotionModel {
  MlpParams params;
  Scaler scaler;

  Classification classify(const MotionFeatures& f) const { return amava::classify(params, scaler, f); }
};

}  // namespace amava
