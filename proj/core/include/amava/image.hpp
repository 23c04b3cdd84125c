#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "amava/types.hpp"

namespace amava {

// Single-channel 8-bit image, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0);
  GrayImage(int w, int h, std::vector<std::uint8_t> data);

  std::size_t size() const { return pixels.size(); }
  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  bool same_shape(const GrayImage& o) const { return width == o.width && height == o.height; }
};

// Interleaved 8-bit RGB, row-major.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;
};

// A pipeline frame: a grayscale image of at least kMinSide pixels per side,
// stamped with the session clock.
class GrayFrame {
 public:
  static constexpr int kMinSide = 16;

  GrayFrame(GrayImage image, Millis timestamp_ms);

  const GrayImage& image() const { return image_; }
  int width() const { return image_.width; }
  int height() const { return image_.height; }
  Millis timestamp_ms() const { return timestamp_ms_; }

 private:
  GrayImage image_;
  Millis timestamp_ms_;
};

// BT.601 luma, rounded to nearest and clamped.
GrayImage to_grayscale(const RgbImage& rgb);

// Bilinear resize with pixel-centre alignment.
GrayImage resize_bilinear(const GrayImage& src, int width, int height);

// Shrinks so the longer side is at most `max_side`, keeping aspect ratio.
// Images already within the bound are returned unchanged.
GrayImage downscale_to_max_side(const GrayImage& src, int max_side);

// Float plane used by the flow estimator and the synthetic corpus.
struct FloatPlane {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  FloatPlane() = default;
  FloatPlane(int w, int h, float fill = 0.f)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  float at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  float& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
};

FloatPlane to_float(const GrayImage& img);
FloatPlane resize_bilinear(const FloatPlane& src, int width, int height);
// Separable Gaussian blur with replicated borders; ksize must be odd.
FloatPlane gaussian_blur(const FloatPlane& src, int ksize, double sigma);

}  // namespace amava
