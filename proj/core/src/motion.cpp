#include "amava/motion.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "amava/errors.hpp"

namespace amava {

void FlowParams::validate() const {
  if (pyramid_levels < 0) throw std::invalid_argument("flow.pyramid_levels must be >= 0");
  if (!(pyramid_scale > 0.0 && pyramid_scale < 1.0)) {
    throw std::invalid_argument("flow.pyramid_scale must lie in (0, 1)");
  }
  if (window_size <= 0 || window_size % 2 == 0) {
    throw std::invalid_argument("flow.window_size must be a positive odd integer");
  }
  if (iterations <= 0) throw std::invalid_argument("flow.iterations must be positive");
  if (poly_n <= 0 || poly_n % 2 == 0) throw std::invalid_argument("flow.poly_n must be a positive odd integer");
  if (!(poly_sigma > 0.0)) throw std::invalid_argument("flow.poly_sigma must be positive");
}

void FrameBatch::validate() const {
  if (frames.size() != 2) {
    throw std::invalid_argument("a batch holds exactly 2 frames, got " + std::to_string(frames.size()));
  }
  if (!frames[0].image().same_shape(frames[1].image())) {
    throw DimensionMismatch("batch frames differ in size");
  }
  if (!(frames[0].timestamp_ms() < frames[1].timestamp_ms())) {
    throw std::invalid_argument("batch frame timestamps must strictly increase");
  }
}

double frame_difference(const GrayImage& a, const GrayImage& b) {
  if (!a.same_shape(b) || a.pixels.size() != b.pixels.size()) {
    throw DimensionMismatch("frame_difference: " + std::to_string(a.width) + "x" +
                            std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                            std::to_string(b.height));
  }
  if (a.pixels.empty()) return 0.0;
  // Integer accumulation is exact for any realistic frame size.
  const std::uint64_t total = std::transform_reduce(
      a.pixels.begin(), a.pixels.end(), b.pixels.begin(), std::uint64_t{0}, std::plus<>(),
      [](std::uint8_t p, std::uint8_t q) -> std::uint64_t { return p > q ? p - q : q - p; });
  return static_cast<double>(total) / static_cast<double>(a.pixels.size());
}

double mean_flow_magnitude(const FlowField& flow) {
  const std::size_t n = static_cast<std::size_t>(flow.width) * flow.height;
  if (flow.u.size() != n || flow.v.size() != n) throw DimensionMismatch("malformed flow field");
  if (n == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += std::hypot(static_cast<double>(flow.u[i]), static_cast<double>(flow.v[i]));
  return sum / static_cast<double>(n);
}

namespace {

// Local quadratic model f(p) ~ p'Ap + b'p + c per pixel, stored as
// {bx, by, axx, ayy, axy} with axy the coefficient of x*y.
using Coef = std::array<float, 5>;

struct PolyPlane {
  int width = 0;
  int height = 0;
  std::vector<Coef> c;

  const Coef& at(int x, int y) const { return c[static_cast<std::size_t>(y) * width + x]; }
};

PolyPlane polynomial_expansion(const FloatPlane& img, int poly_n, double sigma) {
  const int n = poly_n / 2;
  std::vector<double> g(2 * n + 1);
  for (int k = -n; k <= n; ++k) g[k + n] = std::exp(-(k * k) / (2.0 * sigma * sigma));
  const double gsum = std::accumulate(g.begin(), g.end(), 0.0);
  for (auto& w : g) w /= gsum;

  // Weighted Gram matrix of the basis {1, x, y, x^2, y^2, xy}.
  Eigen::Matrix<double, 6, 6> gram = Eigen::Matrix<double, 6, 6>::Zero();
  for (int y = -n; y <= n; ++y) {
    for (int x = -n; x <= n; ++x) {
      Eigen::Matrix<double, 6, 1> phi;
      phi << 1, x, y, x * x, y * y, x * y;
      gram += g[x + n] * g[y + n] * phi * phi.transpose();
    }
  }
  const Eigen::Matrix<double, 6, 6> inv = gram.inverse();

  const int w = img.width;
  const int h = img.height;
  // Vertical pass: weighted sums of f, y*f and y^2*f along columns.
  std::vector<std::array<double, 3>> col(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::array<double, 3> s{0, 0, 0};
      for (int k = -n; k <= n; ++k) {
        const double f = img.at(x, std::clamp(y + k, 0, h - 1));
        const double gk = g[k + n];
        s[0] += gk * f;
        s[1] += gk * k * f;
        s[2] += gk * k * k * f;
      }
      col[static_cast<std::size_t>(y) * w + x] = s;
    }
  }

  PolyPlane out{w, h, std::vector<Coef>(static_cast<std::size_t>(w) * h)};
  for (int y = 0; y < h; ++y) {
    const auto* row = &col[static_cast<std::size_t>(y) * w];
    for (int x = 0; x < w; ++x) {
      // Moments against {1, x, y, x^2, y^2, xy}.
      Eigen::Matrix<double, 6, 1> m = Eigen::Matrix<double, 6, 1>::Zero();
      for (int k = -n; k <= n; ++k) {
        const auto& s = row[std::clamp(x + k, 0, w - 1)];
        const double gk = g[k + n];
        m[0] += gk * s[0];
        m[1] += gk * k * s[0];
        m[2] += gk * s[1];
        m[3] += gk * k * k * s[0];
        m[4] += gk * s[2];
        m[5] += gk * k * s[1];
      }
      const Eigen::Matrix<double, 6, 1> r = inv * m;
      out.c[static_cast<std::size_t>(y) * w + x] = {static_cast<float>(r[1]), static_cast<float>(r[2]),
                                                    static_cast<float>(r[3]), static_cast<float>(r[4]),
                                                    static_cast<float>(r[5])};
    }
  }
  return out;
}

// Per-pixel normal equations of the displacement solve: {g11, g12, g22, h1, h2}.
using Normal = std::array<float, 5>;

void update_matrices(const PolyPlane& r0, const PolyPlane& r1, const FlowField& flow,
                     std::vector<Normal>& out) {
  constexpr int kBorder = 5;
  constexpr float kBorderWeight[kBorder] = {0.14f, 0.14f, 0.4472f, 0.4472f, 0.4472f};
  const int w = flow.width;
  const int h = flow.height;
  out.resize(static_cast<std::size_t>(w) * h);

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const float dx = flow.u[i];
      const float dy = flow.v[i];
      const Coef& p0 = r0.c[i];
      const float fx = x + dx;
      const float fy = y + dy;
      const int x1 = static_cast<int>(std::floor(fx));
      const int y1 = static_cast<int>(std::floor(fy));

      float bx, by, axx, ayy, axy;
      if (x1 >= 0 && y1 >= 0 && x1 <= w - 1 && y1 <= h - 1) {
        const float ax = fx - x1;
        const float ay = fy - y1;
        const float w00 = (1.f - ax) * (1.f - ay), w01 = ax * (1.f - ay), w10 = (1.f - ax) * ay, w11 = ax * ay;
        const int x2 = std::min(x1 + 1, w - 1);
        const int y2 = std::min(y1 + 1, h - 1);
        const Coef& c00 = r1.at(x1, y1);
        const Coef& c01 = r1.at(x2, y1);
        const Coef& c10 = r1.at(x1, y2);
        const Coef& c11 = r1.at(x2, y2);
        Coef p1;
        for (int k = 0; k < 5; ++k) p1[k] = w00 * c00[k] + w01 * c01[k] + w10 * c10[k] + w11 * c11[k];
        bx = (p0[0] - p1[0]) * 0.5f;
        by = (p0[1] - p1[1]) * 0.5f;
        axx = (p0[2] + p1[2]) * 0.5f;
        ayy = (p0[3] + p1[3]) * 0.5f;
        axy = (p0[4] + p1[4]) * 0.25f;
      } else {
        // Displaced outside the second frame: fall back to the first frame's model.
        bx = p0[0] * 0.5f;
        by = p0[1] * 0.5f;
        axx = p0[2];
        ayy = p0[3];
        axy = p0[4] * 0.5f;
      }

      bx += axx * dx + axy * dy;
      by += axy * dx + ayy * dy;

      if (x < kBorder || y < kBorder || x >= w - kBorder || y >= h - kBorder) {
        const float s = (x < kBorder ? kBorderWeight[x] : 1.f) *
                        (x >= w - kBorder ? kBorderWeight[w - x - 1] : 1.f) *
                        (y < kBorder ? kBorderWeight[y] : 1.f) *
                        (y >= h - kBorder ? kBorderWeight[h - y - 1] : 1.f);
        bx *= s;
        by *= s;
        axx *= s;
        ayy *= s;
        axy *= s;
      }

      out[i] = {axx * axx + axy * axy, axy * (axx + ayy), ayy * ayy + axy * axy, axx * bx + axy * by,
                axy * bx + ayy * by};
    }
  }
}

// Box average over a window x window neighbourhood with replicated borders.
std::vector<std::array<double, 5>> box_average(const std::vector<Normal>& m, int w, int h, int window) {
  const int r = window / 2;
  std::vector<std::array<double, 5>> horiz(m.size());
  for (int y = 0; y < h; ++y) {
    const Normal* row = &m[static_cast<std::size_t>(y) * w];
    std::array<double, 5> acc{};
    for (int k = -r; k <= r; ++k) {
      const Normal& v = row[std::clamp(k, 0, w - 1)];
      for (int c = 0; c < 5; ++c) acc[c] += v[c];
    }
    for (int x = 0; x < w; ++x) {
      horiz[static_cast<std::size_t>(y) * w + x] = acc;
      const Normal& in = row[std::min(x + r + 1, w - 1)];
      const Normal& outv = row[std::max(x - r, 0)];
      for (int c = 0; c < 5; ++c) acc[c] += static_cast<double>(in[c]) - outv[c];
    }
  }
  const double norm = 1.0 / (static_cast<double>(window) * window);
  std::vector<std::array<double, 5>> out(m.size());
  for (int x = 0; x < w; ++x) {
    std::array<double, 5> acc{};
    for (int k = -r; k <= r; ++k) {
      const auto& v = horiz[static_cast<std::size_t>(std::clamp(k, 0, h - 1)) * w + x];
      for (int c = 0; c < 5; ++c) acc[c] += v[c];
    }
    for (int y = 0; y < h; ++y) {
      auto& o = out[static_cast<std::size_t>(y) * w + x];
      for (int c = 0; c < 5; ++c) o[c] = acc[c] * norm;
      const auto& in = horiz[static_cast<std::size_t>(std::min(y + r + 1, h - 1)) * w + x];
      const auto& outv = horiz[static_cast<std::size_t>(std::max(y - r, 0)) * w + x];
      for (int c = 0; c < 5; ++c) acc[c] += in[c] - outv[c];
    }
  }
  return out;
}

void solve_flow(const std::vector<std::array<double, 5>>& avg, FlowField& flow) {
  for (std::size_t i = 0; i < avg.size(); ++i) {
    const auto& [g11, g12, g22, h1, h2] = avg[i];
    const double idet = 1.0 / (g11 * g22 - g12 * g12 + 1e-3);
    flow.u[i] = static_cast<float>((g22 * h1 - g12 * h2) * idet);
    flow.v[i] = static_cast<float>((g11 * h2 - g12 * h1) * idet);
  }
}

FlowField resize_flow(const FlowField& src, int width, int height, float gain) {
  FloatPlane u{src.width, src.height}, v{src.width, src.height};
  u.data = src.u;
  v.data = src.v;
  const FloatPlane ru = resize_bilinear(u, width, height);
  const FloatPlane rv = resize_bilinear(v, width, height);
  FlowField out(width, height);
  for (std::size_t i = 0; i < out.u.size(); ++i) {
    out.u[i] = ru.data[i] * gain;
    out.v[i] = rv.data[i] * gain;
  }
  return out;
}

}  // namespace

FlowField compute_flow(const GrayImage& a, const GrayImage& b, const FlowParams& params) {
  params.validate();
  if (!a.same_shape(b)) throw DimensionMismatch("compute_flow: frames differ in size");
  if (a.width < params.window_size || a.height < params.window_size) {
    throw FrameTooSmall("compute_flow: frame " + std::to_string(a.width) + "x" + std::to_string(a.height) +
                        " is smaller than window_size " + std::to_string(params.window_size));
  }

  struct Level {
    int width;
    int height;
    double scale;
  };
  std::vector<Level> levels;
  double scale = 1.0;
  for (int k = 0; k <= params.pyramid_levels; ++k) {
    const int w = static_cast<int>(std::lround(a.width * scale));
    const int h = static_cast<int>(std::lround(a.height * scale));
    if (w < params.poly_n || h < params.poly_n) {
      throw FrameTooSmall("compute_flow: pyramid level " + std::to_string(k) + " would be " + std::to_string(w) +
                          "x" + std::to_string(h) + ", below poly_n " + std::to_string(params.poly_n));
    }
    levels.push_back({w, h, scale});
    scale *= params.pyramid_scale;
  }

  const FloatPlane fa = to_float(a);
  const FloatPlane fb = to_float(b);
  FlowField flow;
  std::vector<Normal> normals;

  for (int k = params.pyramid_levels; k >= 0; --k) {
    const Level& lv = levels[k];
    const double sigma = (1.0 / lv.scale - 1.0) * 0.5;

    auto level_image = [&](const FloatPlane& src) {
      if (k == 0) return src;
      const int ksize = std::max(3, static_cast<int>(std::lround(sigma * 5)) | 1);
      return resize_bilinear(gaussian_blur(src, ksize, sigma), lv.width, lv.height);
    };
    const PolyPlane r0 = polynomial_expansion(level_image(fa), params.poly_n, params.poly_sigma);
    const PolyPlane r1 = polynomial_expansion(level_image(fb), params.poly_n, params.poly_sigma);

    if (flow.u.empty()) {
      flow = FlowField(lv.width, lv.height);
    } else {
      flow = resize_flow(flow, lv.width, lv.height, static_cast<float>(1.0 / params.pyramid_scale));
    }

    update_matrices(r0, r1, flow, normals);
    for (int it = 0; it < params.iterations; ++it) {
      solve_flow(box_average(normals, lv.width, lv.height, params.window_size), flow);
      if (it + 1 < params.iterations) update_matrices(r0, r1, flow, normals);
    }
  }
  return flow;
}

MotionFeatures extract_features(const FrameBatch& batch, const FlowParams& params) {
  batch.validate();
  const GrayImage& a = batch.frames[0].image();
  const GrayImage& b = batch.frames[1].image();
  return MotionFeatures{frame_difference(a, b), mean_flow_magnitude(compute_flow(a, b, params))};
}

}  // namespace amava
