#include "amava/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "amava/errors.hpp"

namespace amava {

bool MlpParams::all_finite() const {
  return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite() && w3.allFinite() &&
         b3.allFinite();
}

bool MlpParams::has_expected_shapes() const {
  return w1.rows() == kHidden1 && w1.cols() == kInput && b1.size() == kHidden1 && w2.rows() == kHidden2 &&
         w2.cols() == kHidden1 && b2.size() == kHidden2 && w3.rows() == kOutput && w3.cols() == kHidden2 &&
         b3.size() == kOutput;
}

Scaler scaler_fit(std::span<const MotionFeatures> rows) {
  if (rows.size() < 2) throw std::invalid_argument("scaler_fit needs at least 2 rows");
  Scaler s;
  const double n = static_cast<double>(rows.size());
  for (const auto& r : rows) {
    s.mean[0] += r.frame_diff;
    s.mean[1] += r.flow_mag;
  }
  s.mean[0] /= n;
  s.mean[1] /= n;
  std::array<double, 2> var{0.0, 0.0};
  for (const auto& r : rows) {
    var[0] += (r.frame_diff - s.mean[0]) * (r.frame_diff - s.mean[0]);
    var[1] += (r.flow_mag - s.mean[1]) * (r.flow_mag - s.mean[1]);
  }
  for (int k = 0; k < 2; ++k) {
    s.std[k] = std::sqrt(var[k] / n);
    if (!(s.std[k] > 0.0)) {
      throw DegenerateVariance(k == 0 ? "frame_diff has zero variance" : "flow_mag has zero variance");
    }
  }
  return s;
}

ScaledFeatures scaler_transform(const Scaler& s, const MotionFeatures& f) {
  return {(f.frame_diff - s.mean[0]) / s.std[0], (f.flow_mag - s.mean[1]) / s.std[1]};
}

std::array<double, 3> logits(const MlpParams& p, const ScaledFeatures& x) {
  Eigen::Vector2d in(x.frame_diff, x.flow_mag);
  const Eigen::VectorXd h1 = (p.w1 * in + p.b1).cwiseMax(0.0);
  const Eigen::VectorXd h2 = (p.w2 * h1 + p.b2).cwiseMax(0.0);
  const Eigen::VectorXd z = p.w3 * h2 + p.b3;
  return {z[0], z[1], z[2]};
}

Probabilities softmax(const std::array<double, 3>& z) {
  const double m = std::max({z[0], z[1], z[2]});
  Probabilities p{std::exp(z[0] - m), std::exp(z[1] - m), std::exp(z[2] - m)};
  const double sum = p[0] + p[1] + p[2];
  for (auto& v : p) v /= sum;
  return p;
}

Probabilities forward(const MlpParams& p, const ScaledFeatures& x) { return softmax(logits(p, x)); }

MovementClass argmax_class(const std::array<double, 3>& scores) {
  int best = 0;
  for (int k = 1; k < 3; ++k) {
    if (scores[k] >= scores[best]) best = k;
  }
  return static_cast<MovementClass>(best);
}

Branch branch_of(MovementClass c) { return c == MovementClass::low ? Branch::low : Branch::high; }

Classification classify(const MlpParams& p, const Scaler& s, const MotionFeatures& f) {
  Classification out;
  out.probabilities = forward(p, scaler_transform(s, f));
  out.movement = argmax_class(out.probabilities);
  out.branch = branch_of(out.movement);
  return out;
}

}  // namespace amava
