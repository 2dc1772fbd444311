#pragma once

#include <cmath>
#include <vector>

#include "hdralign/image.hpp"

namespace hdralign {

struct MotionError {
  double d_theta = 0.0;  // degrees, absolute
  double d_ty = 0.0;     // pixels, absolute
  double d_tx = 0.0;     // pixels, absolute
};

struct JointHistogram {
  int bins = 64;
  std::vector<uint64_t> counts;  // bins x bins, row = a, col = b

  JointHistogram() = default;
  explicit JointHistogram(int b) : bins(b), counts(static_cast<size_t>(b) * b, 0) {}

  uint64_t& at(int i, int j) { return counts[static_cast<size_t>(i) * bins + j]; }
  uint64_t at(int i, int j) const { return counts[static_cast<size_t>(i) * bins + j]; }

  uint64_t total() const {
    uint64_t t = 0;
    for (uint64_t c : counts) t += c;
    return t;
  }
};

/// Apply a Euclidean perturbation; the caller keeps the motion as ground
/// truth for later scoring.
inline GrayImage synth_warp(const GrayImage& img, const Motion& motion) {
  return warp_euclidean(img, motion).image;
}

/// Simulated exposure change with genuine saturation: invert a gamma-2.2
/// response, scale radiance by 2^ev, re-apply the response, clip to 8 bits.
inline GrayImage synth_exposure(const GrayImage& img, double ev) {
  if (ev < -4.0 || ev > 4.0) throw ParameterError("synth_exposure: ev out of [-4, 4]");
  constexpr double kGamma = 2.2;
  const double gain = std::pow(2.0, ev);
  GrayImage out(img.width, img.height);
  for (size_t i = 0; i < img.data.size(); ++i) {
    double v = std::clamp(static_cast<double>(img.data[i]), 0.0, 255.0) / 255.0;
    double radiance = std::pow(v, kGamma) * gain;
    double mapped = 255.0 * std::pow(radiance, 1.0 / kGamma);
    out.data[i] = static_cast<float>(std::clamp(std::lround(mapped), 0L, 255L));
  }
  return out;
}

inline MotionError motion_error(const Motion& est, const Motion& truth) {
  MotionError e;
  e.d_theta = std::abs(est.theta_deg() - truth.theta_deg());
  e.d_tx = std::abs(est.tx - truth.tx);
  e.d_ty = std::abs(est.ty - truth.ty);
  return e;
}

inline JointHistogram joint_histogram(const GrayImage& a, const GrayImage& b,
                                      const ValidityMask& mask, int bins) {
  if (a.width != b.width || a.height != b.height)
    throw ShapeError("joint_histogram: image dimensions differ");
  if (bins < 2) throw ParameterError("joint_histogram: bins must be >= 2");
  JointHistogram jh(bins);
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      if (!mask.at(x, y)) continue;
      int va = static_cast<int>(std::clamp(std::lround(a.at(x, y)), 0L, 255L));
      int vb = static_cast<int>(std::clamp(std::lround(b.at(x, y)), 0L, 255L));
      ++jh.at(std::min(va * bins / 256, bins - 1), std::min(vb * bins / 256, bins - 1));
    }
  }
  return jh;
}

/// Mutual information in bits over the binned joint histogram of the masked
/// pixels; 0*log(0) taken as 0.
inline double mutual_information(const GrayImage& a, const GrayImage& b,
                                 const ValidityMask& mask, int bins = 64) {
  JointHistogram jh = joint_histogram(a, b, mask, bins);
  uint64_t total = jh.total();
  if (total == 0) throw DegenerateInputError("mutual_information: empty mask");

  std::vector<double> pa(bins, 0.0), pb(bins, 0.0);
  for (int i = 0; i < bins; ++i)
    for (int j = 0; j < bins; ++j) {
      double p = static_cast<double>(jh.at(i, j)) / static_cast<double>(total);
      pa[i] += p;
      pb[j] += p;
    }
  double mi = 0.0;
  for (int i = 0; i < bins; ++i) {
    for (int j = 0; j < bins; ++j) {
      if (jh.at(i, j) == 0) continue;
      double p = static_cast<double>(jh.at(i, j)) / static_cast<double>(total);
      mi += p * std::log2(p / (pa[i] * pb[j]));
    }
  }
  return mi;
}

}  // namespace hdralign
