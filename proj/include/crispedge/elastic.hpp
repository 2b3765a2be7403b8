#pragma once

// Elastic displacement fields used to simulate imperfect annotators.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "crispedge/error.hpp"
#include "crispedge/image.hpp"

namespace crispedge {

/// kPeak rescales the smoothed noise so its largest offset equals alpha;
/// kSimard multiplies the smoothed unit noise by alpha directly.
enum class FieldScaling { kPeak, kSimard };

struct DisplacementField {
  Field dx;
  Field dy;
  double alpha = 0.0;
  double smooth_sigma = 0.0;
  std::uint64_t seed = 0;
};

namespace detail {

/// Uniform in [-1, 1), defined by bit manipulation so the sequence does not
/// depend on the standard library's distribution implementation.
inline double signed_unit(std::mt19937_64& rng) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return 2.0 * u - 1.0;
}

}  // namespace detail

/// Gaussian-smoothed uniform noise in [-1, 1), scaled by alpha.
[[nodiscard]] inline DisplacementField make_field(int w, int h, double alpha, double smooth_sigma, std::uint64_t seed,
                                                  FieldScaling scaling = FieldScaling::kPeak) {
  if (!(alpha >= 0.0)) throw InvalidArgument("elastic alpha must be >= 0");
  DisplacementField f{Field(w, h), Field(w, h), alpha, smooth_sigma, seed};
  if (alpha == 0.0) return f;
  // Noise is drawn on a domain padded by the kernel radius and cropped after
  // smoothing, so border replication does not inflate the field near edges.
  const int pad = static_cast<int>(std::ceil(3.0 * smooth_sigma));
  const Rect inner{pad, pad, w, h};
  std::mt19937_64 rng(seed);
  Field nx(w + 2 * pad, h + 2 * pad);
  Field ny(w + 2 * pad, h + 2 * pad);
  for (double& v : nx.values()) v = detail::signed_unit(rng);
  for (double& v : ny.values()) v = detail::signed_unit(rng);
  f.dx = crop(gaussian_blur(nx, smooth_sigma), inner);
  f.dy = crop(gaussian_blur(ny, smooth_sigma), inner);
  double scale = alpha;
  if (scaling == FieldScaling::kPeak) {
    double peak = 0.0;
    for (std::size_t i = 0; i < f.dx.size(); ++i) peak = std::max(peak, std::hypot(f.dx[i], f.dy[i]));
    scale = peak > 0.0 ? alpha / peak : 0.0;
  }
  for (std::size_t i = 0; i < f.dx.size(); ++i) {
    f.dx[i] *= scale;
    f.dy[i] *= scale;
  }
  return f;
}

/// Backward nearest-neighbor warp: out(p) = m(p - d(p)), so content moves by
/// +d. Samples falling outside the image are false.
[[nodiscard]] inline BinaryEdgeMap apply_field(const BinaryEdgeMap& m, const DisplacementField& f) {
  require_same_shape(m, f.dx, "apply_field");
  require_same_shape(m, f.dy, "apply_field");
  BinaryEdgeMap out(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      const int sx = static_cast<int>(std::floor(x - f.dx(x, y) + 0.5));
      const int sy = static_cast<int>(std::floor(y - f.dy(x, y) + 0.5));
      if (m.in_bounds(sx, sy)) out(x, y) = m(sx, sy);
    }
  }
  return out;
}

/// Mean of K independently warped copies (seeds base_seed + k).
[[nodiscard]] inline EdgeMap simulate_annotators(const BinaryEdgeMap& m, double alpha, int annotators,
                                                 std::uint64_t base_seed, double smooth_sigma = 4.0,
                                                 FieldScaling scaling = FieldScaling::kPeak) {
  if (annotators < 1) throw InvalidArgument("simulate_annotators: annotator count must be >= 1");
  EdgeMap acc(m.width(), m.height());
  for (int k = 0; k < annotators; ++k) {
    const auto f = make_field(m.width(), m.height(), alpha, smooth_sigma, base_seed + static_cast<std::uint64_t>(k),
                                scaling);
    const BinaryEdgeMap warped = apply_field(m, f);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += warped[i] ? 1.0 : 0.0;
  }
  for (double& v : acc.values()) v /= annotators;
  return acc;
}

}  // namespace crispedge
