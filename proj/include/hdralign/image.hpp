#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "hdralign/errors.hpp"

namespace hdralign {

/// Single-channel image, row-major. Stored images hold integer values in
/// [0,255]; intermediates (smoothed, warped) are real-valued.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  GrayImage() = default;
  GrayImage(int w, int h, float fill = 0.f)
      : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {
    if (w <= 0 || h <= 0) throw DimensionError("GrayImage: non-positive dimensions");
  }

  float& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
  float at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }

  /// Sample with edge replication.
  float at_clamped(int x, int y) const {
    x = std::clamp(x, 0, width - 1);
    y = std::clamp(y, 0, height - 1);
    return at(x, y);
  }

  bool empty() const { return width == 0 || height == 0; }
  size_t size() const { return data.size(); }

  double mean() const {
    double s = 0.0;
    for (float v : data) s += v;
    return data.empty() ? 0.0 : s / static_cast<double>(data.size());
  }
};

/// Interleaved 8-bit RGB image.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> data;  // r,g,b per pixel

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), data(static_cast<size_t>(w) * h * 3, 0) {
    if (w <= 0 || h <= 0) throw DimensionError("RgbImage: non-positive dimensions");
  }
};

struct ValidityMask {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> bits;

  ValidityMask() = default;
  ValidityMask(int w, int h, bool fill = true)
      : width(w), height(h), bits(static_cast<size_t>(w) * h, fill ? 1 : 0) {}

  bool at(int x, int y) const { return bits[static_cast<size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v) { bits[static_cast<size_t>(y) * width + x] = v ? 1 : 0; }

  size_t count() const {
    size_t n = 0;
    for (uint8_t b : bits) n += b;
    return n;
  }

  /// Shrink the valid region by `r` pixels (box erosion); keeps coded bits
  /// and gradients away from invalid samples.
  ValidityMask eroded(int r) const {
    ValidityMask out(width, height, false);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        bool ok = true;
        for (int dy = -r; ok && dy <= r; ++dy) {
          for (int dx = -r; ok && dx <= r; ++dx) {
            int xx = std::clamp(x + dx, 0, width - 1);
            int yy = std::clamp(y + dy, 0, height - 1);
            if (!at(xx, yy)) ok = false;
          }
        }
        out.set(x, y, ok);
      }
    }
    return out;
  }

  static ValidityMask intersect(const ValidityMask& a, const ValidityMask& b) {
    if (a.width != b.width || a.height != b.height)
      throw ShapeError("ValidityMask::intersect: dimension mismatch");
    ValidityMask out(a.width, a.height, false);
    for (size_t i = 0; i < a.bits.size(); ++i) out.bits[i] = a.bits[i] & b.bits[i];
    return out;
  }
};

/// Euclidean (rigid) 2D motion. theta in radians; rotation is about the
/// image center. Sampling position for an output pixel p is
///   s(p) = c + R(theta) (p - c) + (tx, ty),
/// with R(theta) = [[cos, -sin], [sin, cos]] and c the image center.
struct Motion {
  double theta = 0.0;
  double tx = 0.0;
  double ty = 0.0;

  Motion() = default;
  Motion(double th, double x, double y) : theta(th), tx(x), ty(y) {}

  /// Composition: s_{this} after s_{other}, i.e. s_out = s_this(s_other(p)).
  Motion compose(const Motion& other) const {
    double c = std::cos(theta), s = std::sin(theta);
    return Motion(theta + other.theta,
                  c * other.tx - s * other.ty + tx,
                  s * other.tx + c * other.ty + ty);
  }

  /// Exact inverse: s_inv(s(p)) = p.
  Motion inverse() const {
    double c = std::cos(theta), s = std::sin(theta);
    // R(-theta) * (-t)
    return Motion(-theta, -(c * tx + s * ty), -(-s * tx + c * ty));
  }

  double theta_deg() const { return theta * 180.0 / M_PI; }
};

/// Alg.-style translation doubling between pyramid levels: rotation kept,
/// translations scaled by two.
inline Motion scale_motion_to_finer(const Motion& m) {
  return Motion(m.theta, 2.0 * m.tx, 2.0 * m.ty);
}

inline Motion scale_motion_to_coarser(const Motion& m) {
  return Motion(m.theta, 0.5 * m.tx, 0.5 * m.ty);
}

/// BT.601 luma. Grayscale callers should pass GrayImage straight through.
inline GrayImage to_luminance(const RgbImage& rgb) {
  if (rgb.width <= 0 || rgb.height <= 0)
    throw DimensionError("to_luminance: empty image");
  GrayImage out(rgb.width, rgb.height);
  const size_t n = static_cast<size_t>(rgb.width) * rgb.height;
  for (size_t i = 0; i < n; ++i) {
    double y = 0.299 * rgb.data[3 * i] + 0.587 * rgb.data[3 * i + 1] +
               0.114 * rgb.data[3 * i + 2];
    out.data[i] = static_cast<float>(std::clamp(std::lround(y), 0L, 255L));
  }
  return out;
}

/// Separable Gaussian, kernel normalized to sum 1, replicated borders.
inline GrayImage gaussian_smooth(const GrayImage& img, double sigma, int radius) {
  if (sigma <= 0.0) throw ParameterError("gaussian_smooth: sigma must be positive");
  if (radius < 1) throw ParameterError("gaussian_smooth: radius must be >= 1");
  if (img.empty()) throw DimensionError("gaussian_smooth: empty image");

  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    kernel[i + radius] = v;
    sum += v;
  }
  for (double& v : kernel) v /= sum;

  GrayImage tmp(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += kernel[i + radius] * img.at_clamped(x + i, y);
      tmp.at(x, y) = static_cast<float>(acc);
    }
  }
  GrayImage out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += kernel[i + radius] * tmp.at_clamped(x, y + i);
      out.at(x, y) = static_cast<float>(acc);
    }
  }
  return out;
}

/// Bilinear sample at real-valued (x, y); valid=false if any of the four
/// taps would fall outside the image.
inline bool bilinear_sample(const GrayImage& img, double x, double y, float& out) {
  int x0 = static_cast<int>(std::floor(x));
  int y0 = static_cast<int>(std::floor(y));
  if (x0 < 0 || y0 < 0 || x0 + 1 > img.width - 1 || y0 + 1 > img.height - 1) {
    // Allow exact hits on the last row/column.
    if (x0 == img.width - 1 && x == static_cast<double>(x0) && y0 >= 0 &&
        y0 <= img.height - 1) {
      if (y0 == img.height - 1 && y == static_cast<double>(y0)) {
        out = img.at(x0, y0);
        return true;
      }
      if (y0 + 1 <= img.height - 1) {
        double fy = y - y0;
        out = static_cast<float>((1 - fy) * img.at(x0, y0) + fy * img.at(x0, y0 + 1));
        return true;
      }
    }
    if (y0 == img.height - 1 && y == static_cast<double>(y0) && x0 >= 0 &&
        x0 + 1 <= img.width - 1) {
      double fx = x - x0;
      out = static_cast<float>((1 - fx) * img.at(x0, y0) + fx * img.at(x0 + 1, y0));
      return true;
    }
    return false;
  }
  double fx = x - x0;
  double fy = y - y0;
  double v = (1 - fx) * (1 - fy) * img.at(x0, y0) + fx * (1 - fy) * img.at(x0 + 1, y0) +
             (1 - fx) * fy * img.at(x0, y0 + 1) + fx * fy * img.at(x0 + 1, y0 + 1);
  out = static_cast<float>(v);
  return true;
}

struct WarpResult {
  GrayImage image;
  ValidityMask mask;
};

/// Resample: out(p) = img(s_motion(p)), rotation about the image center.
/// Pixels whose source sample leaves the frame are zeroed and masked out.
inline WarpResult warp_euclidean(const GrayImage& img, const Motion& motion) {
  if (img.empty()) throw DimensionError("warp_euclidean: empty image");
  WarpResult res{GrayImage(img.width, img.height), ValidityMask(img.width, img.height, false)};
  const double cx = 0.5 * (img.width - 1);
  const double cy = 0.5 * (img.height - 1);
  const double c = std::cos(motion.theta), s = std::sin(motion.theta);
  for (int y = 0; y < img.height; ++y) {
    double dy = y - cy;
    for (int x = 0; x < img.width; ++x) {
      double dx = x - cx;
      double sx = cx + c * dx - s * dy + motion.tx;
      double sy = cy + s * dx + c * dy + motion.ty;
      float v;
      if (bilinear_sample(img, sx, sy, v)) {
        res.image.at(x, y) = v;
        res.mask.set(x, y, true);
      }
    }
  }
  return res;
}

struct Pyramid {
  std::vector<GrayImage> levels;  // [0] full resolution, coarsest last
};

inline constexpr int kMinPyramidDim = 32;

/// Gaussian pyramid: smooth (sigma 1.0, radius 2) then 2x decimation; stops
/// when halving would drop below kMinPyramidDim or max_levels is reached.
inline Pyramid build_pyramid(const GrayImage& img, int max_levels) {
  if (std::min(img.width, img.height) < kMinPyramidDim)
    throw DimensionError("build_pyramid: image smaller than 32 in one dimension");
  if (max_levels < 1) throw ParameterError("build_pyramid: max_levels must be >= 1");
  Pyramid pyr;
  pyr.levels.push_back(img);
  while (static_cast<int>(pyr.levels.size()) < max_levels) {
    const GrayImage& prev = pyr.levels.back();
    int w = prev.width / 2, h = prev.height / 2;
    if (std::min(w, h) < kMinPyramidDim) break;
    GrayImage sm = gaussian_smooth(prev, 1.0, 2);
    GrayImage next(w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) next.at(x, y) = sm.at(2 * x, 2 * y);
    pyr.levels.push_back(std::move(next));
  }
  return pyr;
}

/// Round a real-valued image back to 8-bit storage range.
inline GrayImage quantize8(const GrayImage& img) {
  GrayImage out(img.width, img.height);
  for (size_t i = 0; i < img.data.size(); ++i)
    out.data[i] = static_cast<float>(std::clamp(std::lround(img.data[i]), 0L, 255L));
  return out;
}

}  // namespace hdralign
