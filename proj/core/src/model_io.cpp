#include "amava/model_io.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>

#include "amava/errors.hpp"

namespace amava {

namespace {

constexpr std::size_t kMagicLen = sizeof(kModelMagic) - 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32(std::vector<std::uint8_t>& out, double value) {
  put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(value)));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  double f32(const char* what) { return std::bit_cast<float>(u32(what)); }

  void need(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw CorruptModel(std::string("model file truncated while reading ") + what + " at byte " +
                         std::to_string(pos_));
    }
  }

  std::size_t pos() const { return pos_; }
  void skip(std::size_t n) { pos_ += n; }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

template <typename Tensor>
void write_tensor(std::vector<std::uint8_t>& out, const Tensor& t) {
  put_u32(out, static_cast<std::uint32_t>(t.rows()));
  put_u32(out, static_cast<std::uint32_t>(t.cols()));
  for (Eigen::Index r = 0; r < t.rows(); ++r) {
    for (Eigen::Index c = 0; c < t.cols(); ++c) put_f32(out, t(r, c));
  }
}

template <typename Tensor>
void read_tensor(Reader& in, Tensor& t, const char* name, Eigen::Index rows, Eigen::Index cols) {
  const std::uint32_t r = in.u32(name);
  const std::uint32_t c = in.u32(name);
  if (r != rows || c != cols) {
    throw CorruptModel(std::string("shape mismatch for tensor ") + name + ": expected " + std::to_string(rows) +
                       "x" + std::to_string(cols) + ", found " + std::to_string(r) + "x" + std::to_string(c));
  }
  in.need(static_cast<std::size_t>(rows) * cols * 4, name);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) t(i, j) = in.f32(name);
  }
}

}  // namespace

std::vector<std::uint8_t> encode_model(const MlpParams& p, const Scaler& s) {
  if (!p.has_expected_shapes()) throw std::invalid_argument("encode_model: parameters have unexpected shapes");
  std::vector<std::uint8_t> out(kModelMagic, kModelMagic + kMagicLen);
  for (double v : s.mean) put_f32(out, v);
  for (double v : s.std) put_f32(out, v);
  write_tensor(out, p.w1);
  write_tensor(out, p.b1);
  write_tensor(out, p.w2);
  write_tensor(out, p.b2);
  write_tensor(out, p.w3);
  write_tensor(out, p.b3);
  return out;
}

MotionModel decode_model(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kMagicLen || std::memcmp(bytes.data(), kModelMagic, kMagicLen) != 0) {
    throw CorruptModel("not an AMAVA-MLP1 model file (bad magic)");
  }
  Reader in(bytes);
  in.skip(kMagicLen);
  MotionModel m;
  for (auto& v : m.scaler.mean) v = in.f32("scaler mean");
  for (auto& v : m.scaler.std) v = in.f32("scaler std");
  if (!(m.scaler.std[0] > 0.0) || !(m.scaler.std[1] > 0.0)) throw CorruptModel("scaler std must be positive");

  using P = MlpParams;
  read_tensor(in, m.params.w1, "W1", P::kHidden1, P::kInput);
  read_tensor(in, m.params.b1, "b1", P::kHidden1, 1);
  read_tensor(in, m.params.w2, "W2", P::kHidden2, P::kHidden1);
  read_tensor(in, m.params.b2, "b2", P::kHidden2, 1);
  read_tensor(in, m.params.w3, "W3", P::kOutput, P::kHidden2);
  read_tensor(in, m.params.b3, "b3", P::kOutput, 1);
  if (!in.done()) {
    throw CorruptModel("model file has " + std::to_string(bytes.size() - in.pos()) + " trailing bytes");
  }
  if (!m.params.all_finite()) throw CorruptModel("model contains non-finite weights");
  return m;
}

void save_model(const MlpParams& p, const Scaler& s, const std::string& path) {
  const auto bytes = encode_model(p, s);
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp" + std::to_string(std::random_device{}());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StorageError("cannot write model to " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw StorageError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw StorageError("cannot move model into place at " + path);
  }
}

MotionModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StorageError("cannot open model " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_model(bytes);
}

}  // namespace amava
