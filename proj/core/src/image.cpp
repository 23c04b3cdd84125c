#include "amava/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "amava/errors.hpp"

namespace amava {

GrayImage::GrayImage(int w, int h, std::uint8_t fill)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {
  if (w <= 0 || h <= 0) throw DimensionMismatch("image dimensions must be positive");
}

GrayImage::GrayImage(int w, int h, std::vector<std::uint8_t> data)
    : width(w), height(h), pixels(std::move(data)) {
  if (w <= 0 || h <= 0) throw DimensionMismatch("image dimensions must be positive");
  if (pixels.size() != static_cast<std::size_t>(w) * h) {
    throw DimensionMismatch("pixel count " + std::to_string(pixels.size()) + " does not match " +
                            std::to_string(w) + "x" + std::to_string(h));
  }
}

GrayFrame::GrayFrame(GrayImage image, Millis timestamp_ms)
    : image_(std::move(image)), timestamp_ms_(timestamp_ms) {
  if (image_.width < kMinSide || image_.height < kMinSide) {
    throw FrameTooSmall("frame is " + std::to_string(image_.width) + "x" +
                        std::to_string(image_.height) + ", minimum side is " +
                        std::to_string(kMinSide));
  }
  if (image_.pixels.size() != static_cast<std::size_t>(image_.width) * image_.height) {
    throw DimensionMismatch("frame pixel count does not match its dimensions");
  }
}

GrayImage to_grayscale(const RgbImage& rgb) {
  if (rgb.width <= 0 || rgb.height <= 0 ||
      rgb.data.size() != static_cast<std::size_t>(rgb.width) * rgb.height * 3) {
    throw DimensionMismatch("RGB buffer of " + std::to_string(rgb.data.size()) +
                            " bytes does not hold a " + std::to_string(rgb.width) + "x" +
                            std::to_string(rgb.height) + "x3 frame");
  }
  GrayImage out(rgb.width, rgb.height);
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    const double y = 0.299 * rgb.data[3 * i] + 0.587 * rgb.data[3 * i + 1] + 0.114 * rgb.data[3 * i + 2];
    out.pixels[i] = static_cast<std::uint8_t>(std::clamp<long>(std::lround(y), 0, 255));
  }
  return out;
}

namespace {

struct Tap {
  int i0;
  int i1;
  float w1;  // weight of i1; i0 gets 1 - w1
};

std::vector<Tap> linear_taps(int src_len, int dst_len) {
  std::vector<Tap> taps(dst_len);
  const double scale = static_cast<double>(src_len) / dst_len;
  for (int d = 0; d < dst_len; ++d) {
    double s = (d + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(src_len - 1));
    const int i0 = static_cast<int>(std::floor(s));
    const int i1 = std::min(i0 + 1, src_len - 1);
    taps[d] = {i0, i1, static_cast<float>(s - i0)};
  }
  return taps;
}

}  // namespace

FloatPlane resize_bilinear(const FloatPlane& src, int width, int height) {
  if (width <= 0 || height <= 0) throw DimensionMismatch("resize target must be positive");
  if (width == src.width && height == src.height) return src;
  const auto xs = linear_taps(src.width, width);
  const auto ys = linear_taps(src.height, height);
  FloatPlane out(width, height);
  for (int y = 0; y < height; ++y) {
    const auto& ty = ys[y];
    for (int x = 0; x < width; ++x) {
      const auto& tx = xs[x];
      const float top = src.at(tx.i0, ty.i0) * (1.f - tx.w1) + src.at(tx.i1, ty.i0) * tx.w1;
      const float bottom = src.at(tx.i0, ty.i1) * (1.f - tx.w1) + src.at(tx.i1, ty.i1) * tx.w1;
      out.at(x, y) = top * (1.f - ty.w1) + bottom * ty.w1;
    }
  }
  return out;
}

FloatPlane to_float(const GrayImage& img) {
  FloatPlane out(img.width, img.height);
  std::copy(img.pixels.begin(), img.pixels.end(), out.data.begin());
  return out;
}

GrayImage resize_bilinear(const GrayImage& src, int width, int height) {
  const FloatPlane f = resize_bilinear(to_float(src), width, height);
  GrayImage out(width, height);
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    out.pixels[i] = static_cast<std::uint8_t>(std::clamp<long>(std::lround(f.data[i]), 0, 255));
  }
  return out;
}

GrayImage downscale_to_max_side(const GrayImage& src, int max_side) {
  const int longer = std::max(src.width, src.height);
  if (longer <= max_side) return src;
  const double scale = static_cast<double>(max_side) / longer;
  const int w = std::max(1, static_cast<int>(std::lround(src.width * scale)));
  const int h = std::max(1, static_cast<int>(std::lround(src.height * scale)));
  return resize_bilinear(src, w, h);
}

FloatPlane gaussian_blur(const FloatPlane& src, int ksize, double sigma) {
  if (ksize < 1 || ksize % 2 == 0) throw std::invalid_argument("blur kernel size must be odd");
  const int r = ksize / 2;
  std::vector<float> k(ksize);
  double sum = 0;
  for (int i = -r; i <= r; ++i) {
    const double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
    k[i + r] = static_cast<float>(v);
    sum += v;
  }
  for (auto& v : k) v = static_cast<float>(v / sum);

  FloatPlane tmp(src.width, src.height);
  for (int y = 0; y < src.height; ++y) {
    for (int x = 0; x < src.width; ++x) {
      float acc = 0.f;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * src.at(std::clamp(x + i, 0, src.width - 1), y);
      tmp.at(x, y) = acc;
    }
  }
  FloatPlane out(src.width, src.height);
  for (int y = 0; y < src.height; ++y) {
    for (int x = 0; x < src.width; ++x) {
      float acc = 0.f;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * tmp.at(x, std::clamp(y + i, 0, src.height - 1));
      out.at(x, y) = acc;
    }
  }
  return out;
}

}  // namespace amava
