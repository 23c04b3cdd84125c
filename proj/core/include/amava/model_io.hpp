#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amava/classifier.hpp"

namespace amava {

// Model container layout, all integers and floats little-endian:
//
//   "AMAVA-MLP1"                       10-byte magic
//   mean[2], std[2]                    float32 scaler
//   6 x { rows u32, cols u32, data }   W1, b1, W2, b2, W3, b3; float32 row-major
//
// Biases are stored as column vectors (rows = units, cols = 1). Weights are
// narrowed to float32, so a round trip is exact only for float-representable
// values, which is what `train` returns.
inline constexpr char kModelMagic[] = "AMAVA-MLP1";

std::vector<std::uint8_t> encode_model(const MlpParams& p, const Scaler& s);
MotionModel decode_model(const std::vector<std::uint8_t>& bytes);

void save_model(const MlpParams& p, const Scaler& s, const std::string& path);
MotionModel load_model(const std::string& path);

}  // namespace amava
