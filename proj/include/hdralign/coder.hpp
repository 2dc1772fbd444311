#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "hdralign/image.hpp"
#include "hdralign/imf.hpp"

namespace hdralign {

enum class CoderKind {
  LbpGt,     // neighbor >  center, 8 planes
  CensusGe,  // neighbor >= center, 8 planes
  Mtb,       // single plane thresholded at the median
};

/// Neighbor offsets, clockwise from top-left: NW,N,NE,E,SE,S,SW,W (j=1..8).
inline constexpr std::array<std::pair<int, int>, 8> kNeighborOffsets = {{
    {-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0},
}};

/// Stack of binary planes; plane j holds one comparison bit per pixel.
struct BitPlanes {
  int width = 0;
  int height = 0;
  std::vector<std::vector<uint8_t>> planes;  // planes[j][y*width+x] in {0,1}

  BitPlanes() = default;
  BitPlanes(int w, int h, int num_planes)
      : width(w), height(h),
        planes(num_planes, std::vector<uint8_t>(static_cast<size_t>(w) * h, 0)) {}

  int plane_count() const { return static_cast<int>(planes.size()); }
  uint8_t at(int j, int x, int y) const {
    return planes[j][static_cast<size_t>(y) * width + x];
  }
  void set(int j, int x, int y, uint8_t v) {
    planes[j][static_cast<size_t>(y) * width + x] = v;
  }
};

/// Central-difference x/y derivatives of each bit plane, values in [-0.5, 0.5].
struct PlaneGradients {
  int width = 0;
  int height = 0;
  std::vector<std::vector<float>> dx;
  std::vector<std::vector<float>> dy;

  float gx(int j, int x, int y) const { return dx[j][static_cast<size_t>(y) * width + x]; }
  float gy(int j, int x, int y) const { return dy[j][static_cast<size_t>(y) * width + x]; }
};

namespace detail {

inline int histogram_lower_median(const GrayImage& img) {
  Histogram h = histogram(img);
  uint64_t total = h.total();
  uint64_t half = (total + 1) / 2;
  uint64_t acc = 0;
  for (int z = 0; z < 256; ++z) {
    acc += h.counts[z];
    if (acc >= half) return z;
  }
  return 255;
}

}  // namespace detail

/// LBP / census coding over the 8-neighborhood (replicated borders), or a
/// single median-threshold plane for MTB.
inline BitPlanes encode(const GrayImage& img, CoderKind kind) {
  if (img.width < 3 || img.height < 3)
    throw DimensionError("encode: image smaller than 3x3");
  if (kind == CoderKind::Mtb) {
    BitPlanes out(img.width, img.height, 1);
    int median = detail::histogram_lower_median(img);
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        out.set(0, x, y, img.at(x, y) > static_cast<float>(median) ? 1 : 0);
    return out;
  }
  BitPlanes out(img.width, img.height, 8);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      float center = img.at(x, y);
      for (int j = 0; j < 8; ++j) {
        auto [ox, oy] = kNeighborOffsets[j];
        float nb = img.at_clamped(x + ox, y + oy);
        bool bit = (kind == CoderKind::LbpGt) ? (nb > center) : (nb >= center);
        out.set(j, x, y, bit ? 1 : 0);
      }
    }
  }
  return out;
}

/// Byte view: sum over j of 2^(j-1) * bit_j. Only defined for 8 planes.
inline GrayImage to_decimal(const BitPlanes& planes) {
  if (planes.plane_count() != 8)
    throw ShapeError("to_decimal: requires exactly 8 planes");
  GrayImage out(planes.width, planes.height);
  for (int y = 0; y < planes.height; ++y)
    for (int x = 0; x < planes.width; ++x) {
      int v = 0;
      for (int j = 0; j < 8; ++j) v |= planes.at(j, x, y) << j;
      out.at(x, y) = static_cast<float>(v);
    }
  return out;
}

namespace detail {

inline void check_same_shape(const BitPlanes& a, const BitPlanes& b) {
  if (a.width != b.width || a.height != b.height || a.plane_count() != b.plane_count())
    throw ShapeError("bit plane shape mismatch");
}

}  // namespace detail

/// Number of mismatched bits over masked pixels (bitwise XOR tally).
inline uint64_t hamming_cost(const BitPlanes& a, const BitPlanes& b,
                             const ValidityMask& mask) {
  detail::check_same_shape(a, b);
  if (mask.width != a.width || mask.height != a.height)
    throw ShapeError("hamming_cost: mask shape mismatch");
  uint64_t cost = 0;
  for (int j = 0; j < a.plane_count(); ++j) {
    const auto& pa = a.planes[j];
    const auto& pb = b.planes[j];
    for (size_t i = 0; i < pa.size(); ++i)
      if (mask.bits[i]) cost += pa[i] ^ pb[i];
  }
  return cost;
}

/// Sum of squared bit differences; equals hamming_cost exactly on binary
/// inputs, which is what makes the cost differentiable.
inline double squared_cost(const BitPlanes& a, const BitPlanes& b,
                           const ValidityMask& mask) {
  detail::check_same_shape(a, b);
  if (mask.width != a.width || mask.height != a.height)
    throw ShapeError("squared_cost: mask shape mismatch");
  // Integer accumulation keeps the squared-difference/Hamming identity exact.
  uint64_t cost = 0;
  for (int j = 0; j < a.plane_count(); ++j) {
    const auto& pa = a.planes[j];
    const auto& pb = b.planes[j];
    for (size_t i = 0; i < pa.size(); ++i) {
      if (!mask.bits[i]) continue;
      int d = static_cast<int>(pa[i]) - static_cast<int>(pb[i]);
      cost += static_cast<uint64_t>(d * d);
    }
  }
  return static_cast<double>(cost);
}

/// Central differences of each plane, replicated borders.
inline PlaneGradients plane_gradients(const BitPlanes& planes) {
  if (planes.width < 3 || planes.height < 3)
    throw DimensionError("plane_gradients: planes smaller than 3x3");
  PlaneGradients g;
  g.width = planes.width;
  g.height = planes.height;
  const size_t n = static_cast<size_t>(planes.width) * planes.height;
  g.dx.assign(planes.plane_count(), std::vector<float>(n, 0.f));
  g.dy.assign(planes.plane_count(), std::vector<float>(n, 0.f));
  for (int j = 0; j < planes.plane_count(); ++j) {
    for (int y = 0; y < planes.height; ++y) {
      for (int x = 0; x < planes.width; ++x) {
        int xm = std::max(x - 1, 0), xp = std::min(x + 1, planes.width - 1);
        int ym = std::max(y - 1, 0), yp = std::min(y + 1, planes.height - 1);
        size_t i = static_cast<size_t>(y) * planes.width + x;
        g.dx[j][i] = 0.5f * (planes.at(j, xp, y) - planes.at(j, xm, y));
        g.dy[j][i] = 0.5f * (planes.at(j, x, yp) - planes.at(j, x, ym));
      }
    }
  }
  return g;
}

}  // namespace hdralign
