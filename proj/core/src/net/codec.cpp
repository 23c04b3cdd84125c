#include "amava/net/codec.hpp"

#include <csetjmp>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <stdexcept>

#include <jpeglib.h>
#include <openssl/evp.h>

namespace amava::net {

namespace {

struct ErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void on_error(j_common_ptr info) {
  auto* err = reinterpret_cast<ErrorManager*>(info->err);
  (*info->err->format_message)(info, err->message);
  std::longjmp(err->jump, 1);
}

void on_message(j_common_ptr, int) {}

bool is_b64(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '+' || c == '/';
}

std::vector<std::uint8_t> compress(int width, int height, int components, J_COLOR_SPACE space,
                                   const std::uint8_t* data, int quality) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("cannot encode an empty image");
  jpeg_compress_struct info{};
  ErrorManager err{};
  info.err = jpeg_std_error(&err.base);
  err.base.error_exit = on_error;
  struct Buffer {
    unsigned char* data = nullptr;
    unsigned long size = 0;
  };
  const auto buf = std::make_unique<Buffer>();
  if (setjmp(err.jump)) {
    jpeg_destroy_compress(&info);
    std::free(buf->data);
    throw std::runtime_error(std::string("JPEG encode failed: ") + err.message);
  }
  jpeg_create_compress(&info);
  jpeg_mem_dest(&info, &buf->data, &buf->size);
  info.image_width = static_cast<JDIMENSION>(width);
  info.image_height = static_cast<JDIMENSION>(height);
  info.input_components = components;
  info.in_color_space = space;
  jpeg_set_defaults(&info);
  jpeg_set_quality(&info, quality, TRUE);
  jpeg_start_compress(&info, TRUE);
  const auto stride = static_cast<std::size_t>(width) * components;
  while (info.next_scanline < info.image_height) {
    auto* row = const_cast<JSAMPLE*>(data + info.next_scanline * stride);
    jpeg_write_scanlines(&info, &row, 1);
  }
  jpeg_finish_compress(&info);
  jpeg_destroy_compress(&info);
  std::vector<std::uint8_t> bytes(buf->data, buf->data + buf->size);
  std::free(buf->data);
  return bytes;
}

}  // namespace

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw std::invalid_argument("base64 length is not a multiple of 4");
  std::size_t pad = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '=') {
      if (i + 2 < text.size()) throw std::invalid_argument("base64 padding in the middle");
      ++pad;
    } else if (pad || !is_b64(c)) {
      throw std::invalid_argument("invalid base64 character");
    }
  }
  std::vector<std::uint8_t> out(text.size() / 4 * 3);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw std::invalid_argument("invalid base64");
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

GrayImage decode_jpeg_gray(const std::vector<std::uint8_t>& jpeg) {
  if (jpeg.size() < 4 || jpeg[0] != 0xFF || jpeg[1] != 0xD8) throw std::invalid_argument("not a JPEG stream");
  jpeg_decompress_struct info{};
  ErrorManager err{};
  info.err = jpeg_std_error(&err.base);
  err.base.error_exit = on_error;
  err.base.emit_message = on_message;
  // only the pointee changes after setjmp
  const auto pixels = std::make_unique<std::vector<std::uint8_t>>();
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&info);
    throw std::invalid_argument(std::string("corrupt JPEG: ") + err.message);
  }
  jpeg_create_decompress(&info);
  jpeg_mem_src(&info, jpeg.data(), static_cast<unsigned long>(jpeg.size()));
  jpeg_read_header(&info, TRUE);
  info.out_color_space = JCS_GRAYSCALE;
  jpeg_start_decompress(&info);
  const int width = static_cast<int>(info.output_width);
  const int height = static_cast<int>(info.output_height);
  pixels->resize(static_cast<std::size_t>(width) * height);
  while (info.output_scanline < info.output_height) {
    JSAMPROW row = pixels->data() + static_cast<std::size_t>(info.output_scanline) * width;
    jpeg_read_scanlines(&info, &row, 1);
  }
  // libjpeg only warns on premature end of data; treat that as corrupt
  const bool truncated = err.base.num_warnings > 0;
  jpeg_finish_decompress(&info);
  jpeg_destroy_decompress(&info);
  if (truncated) throw std::invalid_argument("corrupt JPEG: data ended early or was damaged");
  return GrayImage(width, height, std::move(*pixels));
}

std::vector<std::uint8_t> encode_jpeg(const GrayImage& image, int quality) {
  return compress(image.width, image.height, 1, JCS_GRAYSCALE, image.pixels.data(), quality);
}

std::vector<std::uint8_t> encode_jpeg(const RgbImage& image, int quality) {
  if (image.data.size() != static_cast<std::size_t>(image.width) * image.height * 3) {
    throw std::invalid_argument("RGB buffer size does not match its dimensions");
  }
  return compress(image.width, image.height, 3, JCS_RGB, image.data.data(), quality);
}

}  // namespace amava::net
