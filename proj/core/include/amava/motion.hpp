#pragma once

#include <cstdint>
#include <vector>

#include "amava/image.hpp"
#include "amava/types.hpp"

namespace amava {

// Dense Farneback flow settings.
struct FlowParams {
  int pyramid_levels = 3;     // extra levels above full resolution
  double pyramid_scale = 0.5;
  int window_size = 15;       // odd; averaging window of the displacement solve
  int iterations = 3;         // refinement passes per level
  int poly_n = 5;             // odd; neighbourhood of the polynomial fit
  double poly_sigma = 1.1;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<float> u;  // horizontal, pixels/frame
  std::vector<float> v;  // vertical, pixels/frame

  FlowField() = default;
  FlowField(int w, int h)
      : width(w), height(h), u(static_cast<std::size_t>(w) * h, 0.f), v(u.size(), 0.f) {}
};

// Two consecutive frames, the unit of pipeline work.
struct FrameBatch {
  std::vector<GrayFrame> frames;
  std::uint64_t batch_index = 0;
  Millis formed_at_ms = 0;
  // Pre-downscale encodings for the scene interpreter; may be empty.
  std::vector<EncodedFrame> originals;

  // Two frames, strictly increasing timestamps, same dimensions.
  void validate() const;
};

struct MotionFeatures {
  double frame_diff = 0.0;  // mean absolute intensity change
  double flow_mag = 0.0;    // mean flow vector length, pixels/frame
};

// Longer-side bound applied to frames before feature extraction.
inline constexpr int kFeatureMaxSide = 320;

double frame_difference(const GrayImage& a, const GrayImage& b);

FlowField compute_flow(const GrayImage& a, const GrayImage& b, const FlowParams& params);

double mean_flow_magnitude(const FlowField& flow);

MotionFeatures extract_features(const FrameBatch& batch, const FlowParams& params);

}  // namespace amava
