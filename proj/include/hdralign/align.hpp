#pragma once

#include <cmath>
#include <vector>

#include "hdralign/coder.hpp"
#include "hdralign/image.hpp"
#include "hdralign/imf.hpp"

namespace hdralign {

/// 3x3 normal-equation system A u = b for the increment u = (tx, ty, theta).
struct NormalEquations {
  double A[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  double b[3] = {0, 0, 0};
  size_t n_valid = 0;
};

struct AlignConfig {
  int max_pyramid_levels = 4;
  int max_iters_per_level = 10;
  double theta_tol = 1e-4;  // radians
  double trans_tol = 0.01;  // pixels
  CoderKind coder = CoderKind::LbpGt;
  double sigma = 0.5;
  int alpha = 5;
  int beta = 254;
  bool use_histogram_init = true;
};

struct LevelDiagnostics {
  int level = 0;
  int iterations = 0;
  double final_cost = 0.0;
  double valid_fraction = 0.0;
};

struct AlignResult {
  Motion motion;  // maps slave coordinates onto the reference frame
  std::vector<LevelDiagnostics> per_level;  // coarsest first
  bool converged = false;
};

/// Accumulate A = sum g g^T and b = sum g r over masked pixels and planes,
/// with g = (dS/dx, dS/dy, x*dS/dy - y*dS/dx), r = S_ref - S_mov, and (x, y)
/// measured from the image center.
inline NormalEquations build_normal_equations(const BitPlanes& ref_planes,
                                              const BitPlanes& mov_planes,
                                              const PlaneGradients& grads,
                                              const ValidityMask& mask) {
  if (ref_planes.width != mov_planes.width || ref_planes.height != mov_planes.height ||
      ref_planes.plane_count() != mov_planes.plane_count())
    throw ShapeError("build_normal_equations: plane shape mismatch");
  if (mask.width != ref_planes.width || mask.height != ref_planes.height)
    throw ShapeError("build_normal_equations: mask shape mismatch");

  NormalEquations eq;
  const double cx = 0.5 * (ref_planes.width - 1);
  const double cy = 0.5 * (ref_planes.height - 1);
  for (int y = 0; y < ref_planes.height; ++y) {
    double yc = y - cy;
    for (int x = 0; x < ref_planes.width; ++x) {
      if (!mask.at(x, y)) continue;
      ++eq.n_valid;
      double xc = x - cx;
      for (int j = 0; j < ref_planes.plane_count(); ++j) {
        double gx = grads.gx(j, x, y);
        double gy = grads.gy(j, x, y);
        if (gx == 0.0 && gy == 0.0) continue;
        double gt = xc * gy - yc * gx;
        double r = static_cast<double>(ref_planes.at(j, x, y)) -
                   static_cast<double>(mov_planes.at(j, x, y));
        eq.A[0][0] += gx * gx;
        eq.A[0][1] += gx * gy;
        eq.A[0][2] += gx * gt;
        eq.A[1][1] += gy * gy;
        eq.A[1][2] += gy * gt;
        eq.A[2][2] += gt * gt;
        eq.b[0] += gx * r;
        eq.b[1] += gy * r;
        eq.b[2] += gt * r;
      }
    }
  }
  if (eq.n_valid == 0)
    throw DegenerateInputError("build_normal_equations: no valid pixels");
  eq.A[1][0] = eq.A[0][1];
  eq.A[2][0] = eq.A[0][2];
  eq.A[2][1] = eq.A[1][2];
  return eq;
}

namespace detail {

inline double frob3(const double m[3][3]) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s += m[i][j] * m[i][j];
  return std::sqrt(s);
}

/// Inverse via adjugate; returns false on a (near-)zero determinant.
inline bool invert3(const double m[3][3], double inv[3][3]) {
  double c00 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
  double c01 = m[1][2] * m[2][0] - m[1][0] * m[2][2];
  double c02 = m[1][0] * m[2][1] - m[1][1] * m[2][0];
  double det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
  if (det == 0.0 || !std::isfinite(det)) return false;
  double id = 1.0 / det;
  inv[0][0] = c00 * id;
  inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * id;
  inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * id;
  inv[1][0] = c01 * id;
  inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * id;
  inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * id;
  inv[2][0] = c02 * id;
  inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * id;
  inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * id;
  return true;
}

}  // namespace detail

/// Solve the 3x3 system for the motion increment. Tikhonov damping
/// (lambda = 1e-6 * trace/3) kicks in when the condition estimate exceeds
/// 1e8 or the plain solve is singular.
inline Motion solve_update(const NormalEquations& eq) {
  double trace = eq.A[0][0] + eq.A[1][1] + eq.A[2][2];
  if (trace == 0.0)
    throw DegenerateInputError("solve_update: zero normal-equation matrix");

  double inv[3][3];
  bool ok = detail::invert3(eq.A, inv);
  double cond = ok ? detail::frob3(eq.A) * detail::frob3(inv)
                   : std::numeric_limits<double>::infinity();
  double a[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a[i][j] = eq.A[i][j];
  if (!ok || cond > 1e8) {
    double lambda = 1e-6 * trace / 3.0;
    for (int i = 0; i < 3; ++i) a[i][i] += lambda;
    if (!detail::invert3(a, inv))
      throw DegenerateInputError("solve_update: singular system after damping");
  }
  double u[3];
  for (int i = 0; i < 3; ++i)
    u[i] = inv[i][0] * eq.b[0] + inv[i][1] * eq.b[1] + inv[i][2] * eq.b[2];
  return Motion(u[2], u[0], u[1]);
}

struct LevelResult {
  Motion motion;
  int iterations = 0;
  double final_cost = 0.0;
  double valid_fraction = 0.0;
  bool converged = false;
};

namespace detail {

struct WarpedCode {
  BitPlanes planes;
  ValidityMask mask;
  double cost = 0.0;
};

/// Warp mov by `w`, smooth, code, and evaluate the squared-bit cost against
/// the already-coded reference.
inline WarpedCode evaluate_warp(const GrayImage& mov, const Motion& w,
                                const BitPlanes& ref_planes, const AlignConfig& cfg) {
  WarpResult wr = warp_euclidean(mov, w);
  GrayImage sm = gaussian_smooth(wr.image, cfg.sigma, 1);
  WarpedCode out;
  out.planes = encode(sm, cfg.coder);
  // Coding and gradients look one pixel out; keep them off invalid samples.
  out.mask = wr.mask.eroded(2);
  out.cost = squared_cost(ref_planes, out.planes, out.mask);
  return out;
}

}  // namespace detail

/// One pyramid level of the linearized differentiable-Hamming solve.
/// `init` and the returned motion are in reference-frame convention
/// (slave = warp(ref-content, motion)); internally the slave is warped by
/// the inverse.
inline LevelResult align_level(const GrayImage& ref_img, const GrayImage& mov_img,
                               const Motion& init, const AlignConfig& cfg) {
  if (ref_img.width != mov_img.width || ref_img.height != mov_img.height)
    throw ShapeError("align_level: image dimensions differ");

  GrayImage ref_sm = gaussian_smooth(ref_img, cfg.sigma, 1);
  BitPlanes ref_planes = encode(ref_sm, cfg.coder);
  PlaneGradients grads = plane_gradients(ref_planes);

  Motion w = init.inverse();
  detail::WarpedCode cur = detail::evaluate_warp(mov_img, w, ref_planes, cfg);

  LevelResult res;
  res.motion = init;
  res.valid_fraction =
      static_cast<double>(cur.mask.count()) / static_cast<double>(ref_img.size());

  for (int iter = 0; iter < cfg.max_iters_per_level; ++iter) {
    Motion delta;
    try {
      NormalEquations eq = build_normal_equations(ref_planes, cur.planes, grads, cur.mask);
      delta = solve_update(eq);
    } catch (const DegenerateInputError&) {
      if (iter == 0) {
        res.final_cost = cur.cost;
        res.converged = false;
        return res;
      }
      break;
    }
    ++res.iterations;

    Motion w_next = w.compose(delta);
    detail::WarpedCode next = detail::evaluate_warp(mov_img, w_next, ref_planes, cfg);
    if (next.cost > cur.cost * 1.01) {
      // Locally invalid Taylor step: halve once, then give up on this level.
      delta = Motion(0.5 * delta.theta, 0.5 * delta.tx, 0.5 * delta.ty);
      w_next = w.compose(delta);
      next = detail::evaluate_warp(mov_img, w_next, ref_planes, cfg);
      if (next.cost > cur.cost * 1.01) break;
    }
    w = w_next;
    cur = std::move(next);
    if (std::abs(delta.theta) < cfg.theta_tol &&
        std::max(std::abs(delta.tx), std::abs(delta.ty)) < cfg.trans_tol) {
      res.converged = true;
      break;
    }
  }

  res.motion = w.inverse();
  res.final_cost = cur.cost;
  res.valid_fraction =
      static_cast<double>(cur.mask.count()) / static_cast<double>(ref_img.size());
  if (res.iterations == cfg.max_iters_per_level && !res.converged)
    res.converged = false;
  return res;
}

namespace detail {

/// Normalized cross-correlation of two 1-D profiles at integer lag `d`
/// (b shifted against a); means taken over the overlap only.
inline double profile_ncc(const std::vector<double>& a, const std::vector<double>& b,
                          int d) {
  int n = static_cast<int>(a.size());
  int lo = std::max(0, -d);
  int hi = std::min(n, n - d);
  if (hi - lo < 8) return -2.0;
  double ma = 0.0, mb = 0.0;
  for (int i = lo; i < hi; ++i) {
    mb += b[i];
    ma += a[i + d];
  }
  int cnt = hi - lo;
  ma /= cnt;
  mb /= cnt;
  double num = 0.0, va = 0.0, vb = 0.0;
  for (int i = lo; i < hi; ++i) {
    double da = a[i + d] - ma;
    double db = b[i] - mb;
    num += da * db;
    va += da * da;
    vb += db * db;
  }
  if (va <= 0.0 || vb <= 0.0) return -2.0;
  return num / std::sqrt(va * vb);
}

inline GrayImage decimal_view(const BitPlanes& planes) {
  if (planes.plane_count() == 8) return to_decimal(planes);
  GrayImage out(planes.width, planes.height);
  for (int y = 0; y < planes.height; ++y)
    for (int x = 0; x < planes.width; ++x)
      out.at(x, y) = static_cast<float>(planes.at(0, x, y));
  return out;
}

}  // namespace detail

/// Translation-only initialization from projection profiles of the decimal
/// coded images: best integer lag of the column-sum and row-sum profiles,
/// searched over +-25% of each dimension. Flat profiles fall back to zero.
inline Motion init_histogram_match(const BitPlanes& ref_planes,
                                   const BitPlanes& mov_planes) {
  if (ref_planes.width != mov_planes.width || ref_planes.height != mov_planes.height)
    throw ShapeError("init_histogram_match: shape mismatch");
  GrayImage ref_dec = detail::decimal_view(ref_planes);
  GrayImage mov_dec = detail::decimal_view(mov_planes);

  const int w = ref_dec.width, h = ref_dec.height;
  std::vector<double> ref_col(w, 0.0), mov_col(w, 0.0), ref_row(h, 0.0), mov_row(h, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      ref_col[x] += ref_dec.at(x, y);
      mov_col[x] += mov_dec.at(x, y);
      ref_row[y] += ref_dec.at(x, y);
      mov_row[y] += mov_dec.at(x, y);
    }

  // mov(p) ~ ref(p + t): mov profile at i matches ref profile at i + t.
  auto best_lag = [](const std::vector<double>& ref_prof,
                     const std::vector<double>& mov_prof) {
    int range = static_cast<int>(ref_prof.size()) / 4;
    int best_d = 0;
    double best = -2.0;
    for (int d = -range; d <= range; ++d) {
      double v = detail::profile_ncc(ref_prof, mov_prof, d);
      if (v > best) {
        best = v;
        best_d = d;
      }
    }
    return best > -2.0 ? best_d : 0;
  };

  return Motion(0.0, best_lag(ref_col, mov_col), best_lag(ref_row, mov_row));
}

/// Coarse-to-fine solve over Gaussian pyramids of the two normalized
/// images. Returns the composed full-resolution motion.
inline AlignResult align_pyramid(const GrayImage& z1_hat, const GrayImage& z2_hat,
                                 const AlignConfig& cfg) {
  if (z1_hat.width != z2_hat.width || z1_hat.height != z2_hat.height)
    throw ShapeError("align_pyramid: image dimensions differ");

  Pyramid ref_pyr = build_pyramid(z1_hat, cfg.max_pyramid_levels);
  Pyramid mov_pyr = build_pyramid(z2_hat, cfg.max_pyramid_levels);
  const int n_levels = static_cast<int>(ref_pyr.levels.size());

  Motion motion;
  if (cfg.use_histogram_init) {
    const GrayImage& ref_c = ref_pyr.levels.back();
    const GrayImage& mov_c = mov_pyr.levels.back();
    BitPlanes rp = encode(gaussian_smooth(ref_c, cfg.sigma, 1), cfg.coder);
    BitPlanes mp = encode(gaussian_smooth(mov_c, cfg.sigma, 1), cfg.coder);
    motion = init_histogram_match(rp, mp);
  }

  AlignResult result;
  for (int level = n_levels - 1; level >= 0; --level) {
    LevelResult lr = align_level(ref_pyr.levels[level], mov_pyr.levels[level], motion, cfg);
    motion = lr.motion;
    result.per_level.push_back(
        {level, lr.iterations, lr.final_cost, lr.valid_fraction});
    result.converged = lr.converged;
    if (level > 0) motion = scale_motion_to_finer(motion);
  }
  result.motion = motion;
  return result;
}

struct FullAlignment {
  AlignResult result;
  GrayImage aligned;       // original z2 resampled onto z1's frame
  ValidityMask aligned_mask;
};

/// End-to-end pipeline: exposure ordering, IMF normalization, pyramid
/// alignment, then resampling of the original slave with the inverse motion.
inline FullAlignment align(const GrayImage& z1, const GrayImage& z2,
                           const AlignConfig& cfg) {
  if (z1.width != z2.width || z1.height != z2.height)
    throw ShapeError("align: image dimensions differ");

  ExposureOrder order = order_by_exposure(z1, z2);
  NormalizedPair np = normalize_pair(*order.longer, *order.shorter, cfg.alpha, cfg.beta);

  AlignResult res = align_pyramid(np.z1_hat, np.z2_hat, cfg);
  if (order.swapped) res.motion = res.motion.inverse();

  FullAlignment out;
  WarpResult wr = warp_euclidean(z2, res.motion.inverse());
  out.result = std::move(res);
  out.aligned = std::move(wr.image);
  out.aligned_mask = std::move(wr.mask);
  return out;
}

/// Same pipeline with the normalization stage bypassed (raw intensities
/// straight into the coder); kept for robustness comparisons.
inline FullAlignment align_without_normalization(const GrayImage& z1,
                                                 const GrayImage& z2,
                                                 const AlignConfig& cfg) {
  if (z1.width != z2.width || z1.height != z2.height)
    throw ShapeError("align: image dimensions differ");
  AlignResult res = align_pyramid(z1, z2, cfg);
  FullAlignment out;
  WarpResult wr = warp_euclidean(z2, res.motion.inverse());
  out.result = std::move(res);
  out.aligned = std::move(wr.image);
  out.aligned_mask = std::move(wr.mask);
  return out;
}

}  // namespace hdralign
