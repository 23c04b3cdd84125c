#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "amava/image.hpp"

namespace amava::net {

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
// Standard alphabet with padding; throws std::invalid_argument otherwise.
std::vector<std::uint8_t> base64_decode(std::string_view text);

// Decodes any baseline/progressive JPEG straight to 8-bit luma.
// Throws std::invalid_argument on corrupt or truncated data.
GrayImage decode_jpeg_gray(const std::vector<std::uint8_t>& jpeg);

std::vector<std::uint8_t> encode_jpeg(const GrayImage& image, int quality = 80);
std::vector<std::uint8_t> encode_jpeg(const RgbImage& image, int quality = 80);

}  // namespace amava::net
