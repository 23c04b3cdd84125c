#pragma once

#include <cstdint>
#include <vector>

#include "amava/image.hpp"
#include "amava/training.hpp"

namespace amava::synthetic {

// Smooth random texture: uniform noise, Gaussian-blurred, stretched to [0, 255].
FloatPlane make_texture(int width, int height, std::uint64_t seed, double blur_sigma = 1.5);

struct FramePair {
  GrayImage first;
  GrayImage second;
};

// Second frame shows the same texture moved by (dx, dy) pixels.
FramePair make_translating_pair(int width, int height, double dx, double dy, std::uint64_t seed);

// Second frame equals the first plus zero-mean Gaussian noise.
FramePair make_static_pair(int width, int height, double noise_sigma, std::uint64_t seed);

// Feature-space rows separated by fixed thresholds:
//   low     frame_diff < 5 and flow_mag < 0.5
//   medium  strictly between the low and high boxes
//   high    frame_diff > 30 and flow_mag > 3
std::vector<LabeledRow> separable_dataset(std::size_t rows_per_class, std::uint64_t seed);

struct LabeledClip {
  FramePair frames;
  MovementClass label = MovementClass::low;  // low for static clips, high for translating ones
};

// Held-out clips: `per_kind` static-with-noise clips and `per_kind`
// translating clips with shifts between 3 and 8 pixels.
std::vector<LabeledClip> clip_corpus(int width, int height, std::size_t per_kind, std::uint64_t seed);

}  // namespace amava::synthetic
