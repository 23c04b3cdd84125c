#include "amava/training.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "amava/errors.hpp"

namespace amava {

namespace {

// Portable draws from mt19937_64; the std distributions are not specified
// bit-for-bit across standard libraries.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(rng, i)]);
}

template <typename F>
void for_each_tensor(MlpParams& a, F&& f) {
  f(a.w1);
  f(a.b1);
  f(a.w2);
  f(a.b2);
  f(a.w3);
  f(a.b3);
}

template <typename F>
void zip_tensors(MlpParams& a, MlpParams& b, MlpParams& c, const MlpParams& g, F&& f) {
  f(a.w1, b.w1, c.w1, g.w1);
  f(a.b1, b.b1, c.b1, g.b1);
  f(a.w2, b.w2, c.w2, g.w2);
  f(a.b2, b.b2, c.b2, g.b2);
  f(a.w3, b.w3, c.w3, g.w3);
  f(a.b3, b.b3, c.b3, g.b3);
}

double squared_norm(const MlpParams& p) {
  return p.w1.squaredNorm() + p.b1.squaredNorm() + p.w2.squaredNorm() + p.b2.squaredNorm() +
         p.w3.squaredNorm() + p.b3.squaredNorm();
}

struct Adam {
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  MlpParams m;
  MlpParams v;
  long step_count = 0;

  void step(MlpParams& p, const MlpParams& g, double lr) {
    ++step_count;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step_count));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step_count));
    zip_tensors(p, m, v, g, [&](auto& theta, auto& mt, auto& vt, const auto& grad) {
      mt = kBeta1 * mt + (1.0 - kBeta1) * grad;
      vt = kBeta2 * vt + (1.0 - kBeta2) * grad.cwiseProduct(grad);
      theta.array() -= lr * (mt.array() / c1) / ((vt.array() / c2).sqrt() + kEps);
    });
  }
};

std::vector<ScaledFeatures> scale_all(const Scaler& s, std::span<const LabeledRow> rows) {
  std::vector<ScaledFeatures> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(scaler_transform(s, r.features));
  return out;
}

std::vector<MovementClass> labels_of(std::span<const LabeledRow> rows) {
  std::vector<MovementClass> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.label);
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0)) throw std::invalid_argument("learning_rate must be positive");
  if (!(weight_decay >= 0)) throw std::invalid_argument("weight_decay must be non-negative");
  if (batch_size <= 0) throw std::invalid_argument("batch_size must be positive");
  if (patience <= 0) throw std::invalid_argument("patience must be positive");
  if (max_epochs <= 0) throw std::invalid_argument("max_epochs must be positive");
  if (!(dropout >= 0 && dropout < 1)) throw std::invalid_argument("dropout must lie in [0, 1)");
}

DatasetSplit stratified_split(std::span<const LabeledRow> rows, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  DatasetSplit split;
  for (int c = 0; c < 3; ++c) {
    std::vector<LabeledRow> members;
    for (const auto& r : rows) {
      if (static_cast<int>(r.label) == c) members.push_back(r);
    }
    shuffle(members, rng);
    const std::size_t n_train = members.size() * 6 / 10;
    const std::size_t n_val = members.size() * 2 / 10;
    for (std::size_t i = 0; i < members.size(); ++i) {
      auto& dst = i < n_train ? split.train : (i < n_train + n_val ? split.validation : split.test);
      dst.push_back(members[i]);
    }
  }
  return split;
}

MlpParams init_params(std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  MlpParams p;
  auto fill = [&](Eigen::MatrixXd& w) {
    const double bound = std::sqrt(6.0 / static_cast<double>(w.cols()));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = (2.0 * uniform01(rng) - 1.0) * bound;
    }
  };
  fill(p.w1);
  fill(p.w2);
  fill(p.w3);
  return p;
}

LossGradient loss_and_gradient(const MlpParams& p, std::span<const ScaledFeatures> x,
                               std::span<const MovementClass> y, double l2,
                               std::span<const Eigen::VectorXd> dropout_masks) {
  if (x.size() != y.size() || x.empty()) throw std::invalid_argument("loss_and_gradient: bad batch");
  if (!dropout_masks.empty() && dropout_masks.size() != x.size()) {
    throw std::invalid_argument("loss_and_gradient: one dropout mask per row required");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd in(2, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    in(0, i) = x[i].frame_diff;
    in(1, i) = x[i].flow_mag;
  }
  const Eigen::MatrixXd z1 = (p.w1 * in).colwise() + p.b1;
  Eigen::MatrixXd h1 = z1.cwiseMax(0.0);
  if (!dropout_masks.empty()) {
    for (Eigen::Index i = 0; i < n; ++i) h1.col(i) = h1.col(i).cwiseProduct(dropout_masks[i]);
  }
  const Eigen::MatrixXd z2 = (p.w2 * h1).colwise() + p.b2;
  const Eigen::MatrixXd h2 = z2.cwiseMax(0.0);
  const Eigen::MatrixXd z3 = (p.w3 * h2).colwise() + p.b3;

  LossGradient out;
  Eigen::MatrixXd dz3(3, n);
  double ce = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = z3.col(i).maxCoeff();
    const Eigen::Vector3d e = (z3.col(i).array() - m).exp();
    const double lse = m + std::log(e.sum());
    const int label = static_cast<int>(y[i]);
    ce += lse - z3(label, i);
    dz3.col(i) = e / e.sum();
    dz3(label, i) -= 1.0;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  dz3 *= inv_n;
  out.loss = ce * inv_n + 0.5 * l2 * squared_norm(p);

  out.grad.w3 = dz3 * h2.transpose();
  out.grad.b3 = dz3.rowwise().sum();
  const Eigen::MatrixXd dz2 = (p.w3.transpose() * dz3).cwiseProduct((z2.array() > 0.0).cast<double>().matrix());
  out.grad.w2 = dz2 * h1.transpose();
  out.grad.b2 = dz2.rowwise().sum();
  Eigen::MatrixXd dh1 = p.w2.transpose() * dz2;
  if (!dropout_masks.empty()) {
    for (Eigen::Index i = 0; i < n; ++i) dh1.col(i) = dh1.col(i).cwiseProduct(dropout_masks[i]);
  }
  const Eigen::MatrixXd dz1 = dh1.cwiseProduct((z1.array() > 0.0).cast<double>().matrix());
  out.grad.w1 = dz1 * in.transpose();
  out.grad.b1 = dz1.rowwise().sum();

  if (l2 != 0.0) {
    MlpParams scaled = p;
    for_each_tensor(scaled, [&](auto& t) { t *= l2; });
    out.grad.w1 += scaled.w1;
    out.grad.b1 += scaled.b1;
    out.grad.w2 += scaled.w2;
    out.grad.b2 += scaled.b2;
    out.grad.w3 += scaled.w3;
    out.grad.b3 += scaled.b3;
  }
  return out;
}

double cross_entropy(const MlpParams& p, const Scaler& s, std::span<const LabeledRow> rows) {
  if (rows.empty()) return 0.0;
  double total = 0.0;
  for (const auto& r : rows) {
    const auto z = logits(p, scaler_transform(s, r.features));
    const double m = std::max({z[0], z[1], z[2]});
    const double lse = m + std::log(std::exp(z[0] - m) + std::exp(z[1] - m) + std::exp(z[2] - m));
    total += lse - z[static_cast<int>(r.label)];
  }
  return total / static_cast<double>(rows.size());
}

double accuracy(const MlpParams& p, const Scaler& s, std::span<const LabeledRow> rows) {
  if (rows.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& r : rows) {
    if (classify(p, s, r.features).movement == r.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(rows.size());
}

void round_to_float(MlpParams& p) {
  for_each_tensor(p, [](auto& t) { t = t.template cast<float>().template cast<double>(); });
}

void round_to_float(Scaler& s) {
  for (int k = 0; k < 2; ++k) {
    s.mean[k] = static_cast<float>(s.mean[k]);
    s.std[k] = static_cast<float>(s.std[k]);
  }
}

TrainResult train(std::span<const LabeledRow> data, const TrainConfig& cfg, const TrainHooks& hooks) {
  cfg.validate();
  std::array<std::size_t, 3> counts{0, 0, 0};
  for (const auto& r : data) ++counts[static_cast<int>(r.label)];
  for (int c = 0; c < 3; ++c) {
    if (counts[c] == 0) {
      throw MissingClass("training data has no rows labelled '" +
                         std::string(to_string(static_cast<MovementClass>(c))) + "'");
    }
  }

  const DatasetSplit split = stratified_split(data, cfg.seed);
  std::vector<MotionFeatures> train_features;
  for (const auto& r : split.train) train_features.push_back(r.features);

  TrainResult result;
  result.scaler = scaler_fit(train_features);
  round_to_float(result.scaler);
  result.report.train_rows = split.train.size();
  result.report.validation_rows = split.validation.size();
  result.report.test_rows = split.test.size();

  const auto xs = scale_all(result.scaler, split.train);
  const auto ys = labels_of(split.train);

  std::mt19937_64 rng(cfg.seed + 1);
  MlpParams params = init_params(cfg.seed);
  Adam adam;
  MlpParams best = params;
  double best_loss = std::numeric_limits<double>::infinity();
  int stale_epochs = 0;
  const double keep = 1.0 - cfg.dropout;

  std::vector<std::size_t> order(xs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle(order, rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<ScaledFeatures> bx;
      std::vector<MovementClass> by;
      std::vector<Eigen::VectorXd> masks;
      for (std::size_t i = start; i < end; ++i) {
        bx.push_back(xs[order[i]]);
        by.push_back(ys[order[i]]);
        if (cfg.dropout > 0.0) {
          Eigen::VectorXd mask(MlpParams::kHidden1);
          for (Eigen::Index k = 0; k < mask.size(); ++k) mask[k] = uniform01(rng) < keep ? 1.0 / keep : 0.0;
          masks.push_back(std::move(mask));
        }
      }
      const LossGradient lg = loss_and_gradient(params, bx, by, cfg.weight_decay, masks);
      adam.step(params, lg.grad, cfg.learning_rate);
      epoch_loss += lg.loss * static_cast<double>(end - start);
    }
    epoch_loss /= static_cast<double>(order.size());

    double val_loss;
    if (hooks.validation_loss) {
      val_loss = hooks.validation_loss(epoch, params);
    } else if (!split.validation.empty()) {
      val_loss = cross_entropy(params, result.scaler, split.validation);
    } else {
      val_loss = cross_entropy(params, result.scaler, split.train);
    }
    result.report.epochs.push_back({epoch, epoch_loss, val_loss});

    if (val_loss < best_loss) {
      best_loss = val_loss;
      best = params;
      result.report.best_epoch = epoch;
      stale_epochs = 0;
    } else if (++stale_epochs >= cfg.patience) {
      spdlog::debug("early stop at epoch {} (best {})", epoch, result.report.best_epoch);
      break;
    }
  }

  round_to_float(best);
  result.params = std::move(best);
  result.report.best_validation_loss = best_loss;
  result.report.test_accuracy = accuracy(result.params, result.scaler, split.test);
  return result;
}

std::vector<LabeledRow> read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StorageError("cannot open dataset " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument(path + ": empty dataset file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "frame_diff,flow_mag,label") {
    throw std::invalid_argument(path + ": expected header 'frame_diff,flow_mag,label', got '" + line + "'");
  }
  std::vector<LabeledRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string a, b, c;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c)) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected 3 columns");
    }
    LabeledRow row;
    try {
      row.features.frame_diff = std::stod(a);
      row.features.flow_mag = std::stod(b);
    } catch (const std::exception&) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": non-numeric feature");
    }
    auto label = parse_movement_class(c);
    if (!label && c.size() == 1 && c[0] >= '0' && c[0] <= '2') label = static_cast<MovementClass>(c[0] - '0');
    if (!label) throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": unknown label '" + c + "'");
    row.label = *label;
    rows.push_back(row);
  }
  return rows;
}

void write_dataset_csv(const std::string& path, std::span<const LabeledRow> rows) {
  std::ofstream out(path);
  if (!out) throw StorageError("cannot write dataset " + path);
  out.precision(17);
  out << "frame_diff,flow_mag,label\n";
  for (const auto& r : rows) {
    out << r.features.frame_diff << ',' << r.features.flow_mag << ',' << to_string(r.label) << '\n';
  }
  if (!out) throw StorageError("write failed for " + path);
}

}  // namespace amava
