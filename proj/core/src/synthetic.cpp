#include "amava/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace amava::synthetic {

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

double gaussian(std::mt19937_64& rng) {
  const double u1 = std::max(uniform01(rng), 1e-300);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint8_t to_pixel(double v) { return static_cast<std::uint8_t>(std::clamp<long>(std::lround(v), 0, 255)); }

double sample_bilinear(const FloatPlane& p, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(p.width - 1));
  y = std::clamp(y, 0.0, static_cast<double>(p.height - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, p.width - 1);
  const int y1 = std::min(y0 + 1, p.height - 1);
  const double ax = x - x0;
  const double ay = y - y0;
  return (1 - ay) * ((1 - ax) * p.at(x0, y0) + ax * p.at(x1, y0)) + ay * ((1 - ax) * p.at(x0, y1) + ax * p.at(x1, y1));
}

}  // namespace

FloatPlane make_texture(int width, int height, std::uint64_t seed, double blur_sigma) {
  std::mt19937_64 rng(seed);
  FloatPlane noise(width, height);
  for (auto& v : noise.data) v = static_cast<float>(uniform(rng, 0.0, 255.0));
  const int ksize = std::max(3, static_cast<int>(std::ceil(blur_sigma * 3)) * 2 + 1);
  FloatPlane tex = gaussian_blur(noise, ksize, blur_sigma);
  const auto [lo, hi] = std::minmax_element(tex.data.begin(), tex.data.end());
  const float min = *lo;
  const float range = std::max(*hi - min, 1e-6f);
  for (auto& v : tex.data) v = (v - min) / range * 255.f;
  return tex;
}

FramePair make_translating_pair(int width, int height, double dx, double dy, std::uint64_t seed) {
  const int margin = static_cast<int>(std::ceil(std::max(std::abs(dx), std::abs(dy)))) + 2;
  const FloatPlane tex = make_texture(width + 2 * margin, height + 2 * margin, seed);
  FramePair pair{GrayImage(width, height), GrayImage(width, height)};
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      pair.first.at(x, y) = to_pixel(tex.at(x + margin, y + margin));
      pair.second.at(x, y) = to_pixel(sample_bilinear(tex, x + margin - dx, y + margin - dy));
    }
  }
  return pair;
}

FramePair make_static_pair(int width, int height, double noise_sigma, std::uint64_t seed) {
  const FloatPlane tex = make_texture(width, height, seed);
  std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
  FramePair pair{GrayImage(width, height), GrayImage(width, height)};
  for (std::size_t i = 0; i < tex.data.size(); ++i) {
    pair.first.pixels[i] = to_pixel(tex.data[i]);
    pair.second.pixels[i] = to_pixel(pair.first.pixels[i] + noise_sigma * gaussian(rng));
  }
  return pair;
}

std::vector<LabeledRow> separable_dataset(std::size_t rows_per_class, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<LabeledRow> rows;
  rows.reserve(rows_per_class * 3);
  for (std::size_t i = 0; i < rows_per_class; ++i) {
    rows.push_back({{uniform(rng, 0.0, 4.8), uniform(rng, 0.0, 0.48)}, MovementClass::low});
    rows.push_back({{uniform(rng, 6.0, 28.0), uniform(rng, 0.6, 2.8)}, MovementClass::medium});
    rows.push_back({{uniform(rng, 31.0, 60.0), uniform(rng, 3.2, 8.0)}, MovementClass::high});
  }
  return rows;
}

std::vector<LabeledClip> clip_corpus(int width, int height, std::size_t per_kind, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<LabeledClip> clips;
  clips.reserve(per_kind * 2);
  for (std::size_t i = 0; i < per_kind; ++i) {
    clips.push_back({make_static_pair(width, height, 1.0, rng()), MovementClass::low});
    const double magnitude = uniform(rng, 3.0, 8.0);
    const double angle = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    clips.push_back({make_translating_pair(width, height, magnitude * std::cos(angle), magnitude * std::sin(angle), rng()),
                     MovementClass::high});
  }
  return clips;
}

}  // namespace amava::synthetic
