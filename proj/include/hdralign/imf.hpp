#pragma once

#include <array>
#include <cstdint>
#include <utility>

#include "hdralign/image.hpp"

namespace hdralign {

struct Histogram {
  std::array<uint64_t, 256> counts{};

  uint64_t total() const {
    uint64_t t = 0;
    for (uint64_t c : counts) t += c;
    return t;
  }
};

/// 256-entry monotone non-decreasing intensity lookup table.
struct IntensityLut {
  std::array<uint8_t, 256> table{};

  uint8_t operator[](int z) const { return table[z]; }

  bool is_monotone() const {
    for (int z = 0; z < 255; ++z)
      if (table[z + 1] < table[z]) return false;
    return true;
  }

  static IntensityLut identity() {
    IntensityLut lut;
    for (int z = 0; z < 256; ++z) lut.table[z] = static_cast<uint8_t>(z);
    return lut;
  }
};

struct SaturationThresholds {
  int alpha = 5;
  int beta = 254;
  int zeta1 = 0;
  int zeta2 = 255;
};

struct NormalizedPair {
  GrayImage z1_hat;
  GrayImage z2_hat;
  SaturationThresholds thresholds;
  IntensityLut f12;
  IntensityLut f21;
};

inline Histogram histogram(const GrayImage& img) {
  Histogram h;
  for (float v : img.data) {
    int z = static_cast<int>(std::clamp(std::lround(v), 0L, 255L));
    ++h.counts[z];
  }
  return h;
}

namespace detail {

inline std::array<double, 256> cumulative_normalized(const Histogram& h) {
  std::array<double, 256> cdf{};
  double total = static_cast<double>(h.total());
  double acc = 0.0;
  for (int z = 0; z < 256; ++z) {
    acc += static_cast<double>(h.counts[z]);
    cdf[z] = acc / total;
  }
  return cdf;
}

/// Histogram specification: lut[z] = smallest v with cdf_dst(v) >= cdf_src(z).
inline IntensityLut match_cdf(const std::array<double, 256>& src,
                              const std::array<double, 256>& dst) {
  IntensityLut lut;
  int v = 0;
  for (int z = 0; z < 256; ++z) {
    while (v < 255 && dst[v] < src[z] - 1e-12) ++v;
    lut.table[z] = static_cast<uint8_t>(v);
  }
  return lut;
}

}  // namespace detail

/// Estimate the intensity mapping functions between two exposures of the
/// same scene from their cumulative histograms. Returns (f12, f21).
inline std::pair<IntensityLut, IntensityLut> estimate_imf(const GrayImage& z1,
                                                          const GrayImage& z2) {
  if (z1.empty() || z2.empty()) throw DimensionError("estimate_imf: empty image");
  auto cdf1 = detail::cumulative_normalized(histogram(z1));
  auto cdf2 = detail::cumulative_normalized(histogram(z2));
  return {detail::match_cdf(cdf1, cdf2), detail::match_cdf(cdf2, cdf1)};
}

/// Saturation synchronization constants:
///   zeta1 = max{z : f12[z] <= alpha} (0 if none), then min(zeta1, beta)
///   zeta2 = min{z : f21[z] >= beta} (255 if none), then max(zeta2, alpha)
inline SaturationThresholds compute_thresholds(const IntensityLut& f12,
                                               const IntensityLut& f21,
                                               int alpha = 5, int beta = 254) {
  SaturationThresholds t;
  t.alpha = alpha;
  t.beta = beta;
  int zeta1 = 0;
  for (int z = 255; z >= 0; --z) {
    if (f12[z] <= alpha) {
      zeta1 = z;
      break;
    }
  }
  int zeta2 = 255;
  for (int z = 0; z < 256; ++z) {
    if (f21[z] >= beta) {
      zeta2 = z;
      break;
    }
  }
  t.zeta1 = std::min(zeta1, beta);
  t.zeta2 = std::max(zeta2, alpha);
  return t;
}

/// Order two images by mean intensity, longer exposure first. Ties keep the
/// input order. Returns (long, short, swapped).
struct ExposureOrder {
  const GrayImage* longer;
  const GrayImage* shorter;
  bool swapped;
};

inline ExposureOrder order_by_exposure(const GrayImage& a, const GrayImage& b) {
  if (a.mean() >= b.mean()) return {&a, &b, false};
  return {&b, &a, true};
}

/// Bidirectional saturation-synchronized normalization. z1 must be the
/// longer exposure (mean check with a 1-level tolerance band).
inline NormalizedPair normalize_pair(const GrayImage& z1, const GrayImage& z2,
                                     int alpha = 5, int beta = 254) {
  if (z1.empty() || z2.empty()) throw DimensionError("normalize_pair: empty image");
  if (z1.mean() < z2.mean() - 1.0)
    throw OrderingError("normalize_pair: z1 must be the longer exposure");

  NormalizedPair out;
  auto [f12, f21] = estimate_imf(z1, z2);
  out.f12 = f12;
  out.f21 = f21;
  out.thresholds = compute_thresholds(f12, f21, alpha, beta);

  out.z1_hat = GrayImage(z1.width, z1.height);
  for (size_t i = 0; i < z1.data.size(); ++i) {
    int z = static_cast<int>(std::clamp(std::lround(z1.data[i]), 0L, 255L));
    out.z1_hat.data[i] = (z >= out.thresholds.zeta1) ? static_cast<float>(z)
                                                     : static_cast<float>(f12[z]);
  }
  out.z2_hat = GrayImage(z2.width, z2.height);
  for (size_t i = 0; i < z2.data.size(); ++i) {
    int z = static_cast<int>(std::clamp(std::lround(z2.data[i]), 0L, 255L));
    out.z2_hat.data[i] = (z <= out.thresholds.zeta2) ? static_cast<float>(z)
                                                     : static_cast<float>(f21[z]);
  }
  return out;
}

}  // namespace hdralign
