#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <opencv2/video/tracking.hpp>

#include "amava/errors.hpp"
#include "amava/motion.hpp"
#include "amava/synthetic.hpp"

using namespace amava;

namespace {

GrayImage random_image(int w, int h, std::mt19937_64& rng) {
  GrayImage img(w, h);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng() & 0xff);
  return img;
}

double naive_difference(const GrayImage& a, const GrayImage& b) {
  double sum = 0.0;
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) sum += std::abs(static_cast<double>(b.at(x, y)) - a.at(x, y));
  }
  return sum / (static_cast<double>(a.width) * a.height);
}

// Mean over the region at least `margin` pixels from every border.
std::pair<double, double> interior_mean(const FlowField& f, int margin) {
  double su = 0, sv = 0;
  int n = 0;
  for (int y = margin; y < f.height - margin; ++y) {
    for (int x = margin; x < f.width - margin; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * f.width + x;
      su += f.u[i];
      sv += std::abs(f.v[i]);
      ++n;
    }
  }
  return {su / n, sv / n};
}

cv::Mat to_mat(const GrayImage& img) {
  return cv::Mat(img.height, img.width, CV_8UC1, const_cast<std::uint8_t*>(img.pixels.data())).clone();
}

}  // namespace

TEST(Grayscale, LumaWeights) {
  RgbImage black{4, 4, std::vector<std::uint8_t>(48, 0)};
  for (auto p : to_grayscale(black).pixels) EXPECT_EQ(p, 0);
  RgbImage white{4, 4, std::vector<std::uint8_t>(48, 255)};
  for (auto p : to_grayscale(white).pixels) EXPECT_EQ(p, 255);
  RgbImage red{3, 2, {}};
  for (int i = 0; i < 6; ++i) red.data.insert(red.data.end(), {100, 0, 0});
  for (auto p : to_grayscale(red).pixels) EXPECT_EQ(p, 30);
}

TEST(Grayscale, MalformedBuffer) {
  RgbImage bad{4, 4, std::vector<std::uint8_t>(47, 0)};
  EXPECT_THROW(to_grayscale(bad), DimensionMismatch);
}

TEST(GrayFrame, EnforcesMinimumSide) {
  EXPECT_THROW(GrayFrame(GrayImage(15, 40), 0), FrameTooSmall);
  EXPECT_NO_THROW(GrayFrame(GrayImage(16, 16), 0));
}

TEST(FrameDifference, Examples) {
  std::mt19937_64 rng(3);
  const auto a = random_image(32, 24, rng);
  EXPECT_EQ(frame_difference(a, a), 0.0);

  GrayImage base(20, 20);
  for (std::size_t i = 0; i < base.pixels.size(); ++i) base.pixels[i] = static_cast<std::uint8_t>(i % 246);
  GrayImage plus = base;
  for (auto& p : plus.pixels) p = static_cast<std::uint8_t>(p + 10);
  EXPECT_DOUBLE_EQ(frame_difference(base, plus), 10.0);

  GrayImage zero(4, 4), one(4, 4);
  one.at(2, 1) = 16;
  EXPECT_DOUBLE_EQ(frame_difference(zero, one), 1.0);
}

TEST(FrameDifference, DimensionMismatch) {
  EXPECT_THROW(frame_difference(GrayImage(16, 16), GrayImage(16, 17)), DimensionMismatch);
}

TEST(FrameDifference, MatchesNaiveLoopAndIsSymmetric) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const int w = 16 + static_cast<int>(rng() % 100);
    const int h = 16 + static_cast<int>(rng() % 80);
    const auto a = random_image(w, h, rng);
    const auto b = random_image(w, h, rng);
    EXPECT_NEAR(frame_difference(a, b), naive_difference(a, b), 1e-9);
    EXPECT_EQ(frame_difference(a, b), frame_difference(b, a));
  }
}

TEST(FlowMagnitude, Examples) {
  EXPECT_EQ(mean_flow_magnitude(FlowField(8, 8)), 0.0);
  FlowField f(5, 3);
  std::fill(f.u.begin(), f.u.end(), 3.f);
  std::fill(f.v.begin(), f.v.end(), 4.f);
  EXPECT_DOUBLE_EQ(mean_flow_magnitude(f), 5.0);
  FlowField g(2, 1);
  g.u = {1.f, 0.f};
  g.v = {0.f, 1.f};
  EXPECT_DOUBLE_EQ(mean_flow_magnitude(g), 1.0);
}

TEST(FlowMagnitude, PermutationInvariant) {
  std::mt19937_64 rng(5);
  std::normal_distribution<float> n(0.f, 2.f);
  FlowField f(17, 9);
  for (std::size_t i = 0; i < f.u.size(); ++i) {
    f.u[i] = n(rng);
    f.v[i] = n(rng);
  }
  std::vector<std::size_t> order(f.u.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  FlowField g(17, 9);
  for (std::size_t i = 0; i < order.size(); ++i) {
    g.u[i] = f.u[order[i]];
    g.v[i] = f.v[order[i]];
  }
  EXPECT_NEAR(mean_flow_magnitude(f), mean_flow_magnitude(g), 1e-12);
}

TEST(Flow, IdenticalFramesGiveZeroField) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 3; ++trial) {
    const auto tex = synthetic::make_translating_pair(96, 72, 0.0, 0.0, rng()).first;
    const auto flow = compute_flow(tex, tex, FlowParams{});
    for (std::size_t i = 0; i < flow.u.size(); ++i) {
      ASSERT_LE(std::abs(flow.u[i]), 1e-3);
      ASSERT_LE(std::abs(flow.v[i]), 1e-3);
    }
  }
  const auto noise = random_image(40, 40, rng);
  const auto flow = compute_flow(noise, noise, FlowParams{});
  EXPECT_LT(mean_flow_magnitude(flow), 1e-3);
}

TEST(Flow, ThreePixelShift) {
  const auto pair = synthetic::make_translating_pair(128, 128, 3.0, 0.0, 42);
  const FlowParams p;
  const auto flow = compute_flow(pair.first, pair.second, p);
  const auto [u, v] = interior_mean(flow, p.window_size);
  EXPECT_GE(u, 2.4);
  EXPECT_LE(u, 3.6);
  EXPECT_LT(v, 0.5);
}

TEST(Flow, UniformFramesWithBrightnessOffset) {
  GrayImage a(64, 64, 100), b(64, 64, 130);
  EXPECT_LT(mean_flow_magnitude(compute_flow(a, b, FlowParams{})), 0.5);
}

TEST(Flow, TooSmallForPyramid) {
  FlowParams p;
  p.window_size = 5;
  p.pyramid_levels = 4;  // 16 -> 8 -> 4 falls below poly_n
  EXPECT_THROW(compute_flow(GrayImage(16, 16), GrayImage(16, 16), p), FrameTooSmall);
  EXPECT_THROW(compute_flow(GrayImage(12, 40), GrayImage(12, 40), FlowParams{}), FrameTooSmall);
}

TEST(Flow, ParamsValidation) {
  FlowParams p;
  p.window_size = 14;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.pyramid_scale = 1.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.poly_n = 4;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

// Reference implementation with the same parameters, flags = 0, at the
// working resolution of the pipeline.
TEST(Flow, AgreesWithOpenCvFarneback) {
  const FlowParams p;
  for (const auto& [dx, dy] : std::vector<std::pair<double, double>>{{3.0, 0.0}, {-2.0, 1.5}, {5.0, 4.0}}) {
    const auto pair = synthetic::make_translating_pair(320, 240, dx, dy, 77);
    cv::Mat ref;
    cv::calcOpticalFlowFarneback(to_mat(pair.first), to_mat(pair.second), ref, p.pyramid_scale, p.pyramid_levels,
                                 p.window_size, p.iterations, p.poly_n, p.poly_sigma, 0);
    const auto ours = compute_flow(pair.first, pair.second, p);
    double worst = 0.0, ref_mag = 0.0;
    for (int y = p.window_size; y < ours.height - p.window_size; ++y) {
      for (int x = p.window_size; x < ours.width - p.window_size; ++x) {
        const auto r = ref.at<cv::Vec2f>(y, x);
        const std::size_t i = static_cast<std::size_t>(y) * ours.width + x;
        worst = std::max({worst, static_cast<double>(std::abs(ours.u[i] - r[0])),
                          static_cast<double>(std::abs(ours.v[i] - r[1]))});
      }
    }
    for (int y = 0; y < ref.rows; ++y) {
      for (int x = 0; x < ref.cols; ++x) ref_mag += std::hypot(ref.at<cv::Vec2f>(y, x)[0], ref.at<cv::Vec2f>(y, x)[1]);
    }
    ref_mag /= ref.rows * ref.cols;
    EXPECT_LT(worst, 0.05) << "shift " << dx << "," << dy;
    EXPECT_NEAR(mean_flow_magnitude(ours), ref_mag, 0.02);
    EXPECT_NEAR(mean_flow_magnitude(ours), std::hypot(dx, dy), 0.05);
  }
}

TEST(ExtractFeatures, Examples) {
  const FlowParams p;
  auto batch_of = [](const GrayImage& a, const GrayImage& b) {
    FrameBatch batch;
    batch.frames = {GrayFrame(a, 0), GrayFrame(b, 500)};
    return batch;
  };
  const auto tex = synthetic::make_translating_pair(96, 96, 0, 0, 1).first;
  const auto same = extract_features(batch_of(tex, tex), p);
  EXPECT_EQ(same.frame_diff, 0.0);
  EXPECT_LT(same.flow_mag, 1e-3);

  const auto noisy = synthetic::make_static_pair(128, 128, 1.0, 2);
  const auto still = extract_features(batch_of(noisy.first, noisy.second), p);
  EXPECT_LT(still.frame_diff, 2.0);
  EXPECT_LT(still.flow_mag, 0.5);

  const auto moved = synthetic::make_translating_pair(128, 128, 5.0, 0.0, 3);
  const auto moving = extract_features(batch_of(moved.first, moved.second), p);
  EXPECT_GE(moving.flow_mag, 4.0);
  EXPECT_LE(moving.flow_mag, 6.0);
}

TEST(ExtractFeatures, BatchValidation) {
  FrameBatch b;
  b.frames = {GrayFrame(GrayImage(32, 32), 10), GrayFrame(GrayImage(32, 32), 10)};
  EXPECT_THROW(extract_features(b, FlowParams{}), std::invalid_argument);
  b.frames = {GrayFrame(GrayImage(32, 32), 10), GrayFrame(GrayImage(32, 40), 20)};
  EXPECT_THROW(extract_features(b, FlowParams{}), DimensionMismatch);
}

TEST(Resize, DownscaleKeepsAspect) {
  const auto img = downscale_to_max_side(GrayImage(640, 480, 7), 320);
  EXPECT_EQ(img.width, 320);
  EXPECT_EQ(img.height, 240);
  EXPECT_EQ(img.pixels[1000], 7);
  const auto small = downscale_to_max_side(GrayImage(100, 50, 1), 320);
  EXPECT_EQ(small.width, 100);
}
