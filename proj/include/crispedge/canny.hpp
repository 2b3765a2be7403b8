#pragma once

// Classical Canny (Sobel gradients, 4-direction suppression, hysteresis) and
// the over-detection fusion that unions low-threshold Canny maps computed at
// several blur strengths.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "crispedge/error.hpp"
#include "crispedge/image.hpp"

namespace crispedge {

struct CannyParams {
  /// Fractions of the 99th-percentile gradient magnitude.
  double low_frac = 0.05;
  double high_frac = 0.15;
  std::vector<double> blur_sigmas = {1.0, 2.0, 3.0};

  void validate() const {
    if (!(low_frac > 0.0 && low_frac <= high_frac && high_frac <= 1.0)) {
      throw InvalidArgument("canny thresholds must satisfy 0 < low_frac <= high_frac <= 1");
    }
    if (blur_sigmas.empty()) throw InvalidArgument("canny needs at least one blur sigma");
    for (double s : blur_sigmas) {
      if (!(s >= 0.0)) throw InvalidArgument("blur sigmas must be >= 0");
    }
  }
};

struct Gradients {
  Field gx;
  Field gy;
  Field magnitude;
  /// Edge direction (perpendicular to the gradient), in [0, pi).
  Field orientation;
};

/// 3x3 Sobel responses with border replication.
[[nodiscard]] inline Gradients sobel_gradients(const GrayImage& img) {
  const int w = img.width();
  const int h = img.height();
  Gradients g{Field(w, h), Field(w, h), Field(w, h), Field(w, h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      auto p = [&](int dx, int dy) { return img.clamped(x + dx, y + dy); };
      const double gx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
      const double gy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
      g.gx(x, y) = gx;
      g.gy(x, y) = gy;
      g.magnitude(x, y) = std::sqrt(gx * gx + gy * gy);
      double o = std::atan2(gy, gx) + std::numbers::pi / 2.0;
      o = std::fmod(o, std::numbers::pi);
      if (o < 0.0) o += std::numbers::pi;
      if (o >= std::numbers::pi) o = 0.0;
      g.orientation(x, y) = o;
    }
  }
  return g;
}

namespace detail {

/// Neighbor step along the gradient, quantized to 4 bins.
inline std::pair<int, int> quantized_normal(double gx, double gy) {
  double a = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
  if (a < 0.0) a += 180.0;
  if (a < 22.5 || a >= 157.5) return {1, 0};
  if (a < 67.5) return {1, 1};
  if (a < 112.5) return {0, 1};
  return {-1, 1};
}

}  // namespace detail

/// Canny on precomputed gradients with absolute thresholds.
[[nodiscard]] inline BinaryEdgeMap canny_from_gradients(const Gradients& g, double low, double high) {
  if (!(low > 0.0 && low <= high)) throw InvalidArgument("canny thresholds must satisfy 0 < low <= high");
  const Field& mag = g.magnitude;
  const int w = mag.width();
  const int h = mag.height();
  auto at = [&](int x, int y) { return mag.in_bounds(x, y) ? mag(x, y) : 0.0; };

  // Suppression: strictly above the backward neighbor, at least the forward
  // one, so a two-pixel plateau keeps exactly one pixel. Magnitudes within a
  // relative 1e-9 count as equal; blurring a symmetric step leaves rounding
  // noise that would otherwise pick the plateau side arbitrarily.
  const double peak = *std::max_element(mag.values().begin(), mag.values().end());
  const double tie = 1e-9 * peak;
  BinaryEdgeMap weak(w, h);
  BinaryEdgeMap strong(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double m = mag(x, y);
      if (m < low) continue;
      const auto [dx, dy] = detail::quantized_normal(g.gx(x, y), g.gy(x, y));
      if (m > at(x - dx, y - dy) + tie && m >= at(x + dx, y + dy) - tie) {
        weak(x, y) = 1;
        if (m >= high) strong(x, y) = 1;
      }
    }
  }

  BinaryEdgeMap out(w, h);
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!strong(x, y) || out(x, y)) continue;
      out(x, y) = 1;
      stack.emplace_back(x, y);
      while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        for (auto [ox, oy] : kNeighbors8) {
          const int nx = cx + ox;
          const int ny = cy + oy;
          if (weak.in_bounds(nx, ny) && weak(nx, ny) && !out(nx, ny)) {
            out(nx, ny) = 1;
            stack.emplace_back(nx, ny);
          }
        }
      }
    }
  }
  return out;
}

[[nodiscard]] inline BinaryEdgeMap canny(const GrayImage& img, double low, double high) {
  return canny_from_gradients(sobel_gradients(img), low, high);
}

/// q-quantile (nearest rank) of the field values.
[[nodiscard]] inline double percentile(const Field& f, double q) {
  std::vector<double> v(f.values().begin(), f.values().end());
  const auto k = static_cast<std::size_t>(std::floor(q * static_cast<double>(v.size() - 1)));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

/// Reference magnitude the fractional thresholds scale: the 99th percentile,
/// or the maximum when the percentile is zero (sparse-edge images). Zero
/// means the image has no gradient at all.
[[nodiscard]] inline double reference_magnitude(const Field& magnitude) {
  const double p99 = percentile(magnitude, 0.99);
  if (p99 > 0.0) return p99;
  return *std::max_element(magnitude.values().begin(), magnitude.values().end());
}

/// Canny at one blur strength with percentile-relative thresholds.
[[nodiscard]] inline BinaryEdgeMap canny_relative(const GrayImage& img, double sigma, double low_frac,
                                                  double high_frac) {
  const Gradients g = sobel_gradients(gaussian_blur(img, sigma));
  const double ref = reference_magnitude(g.magnitude);
  if (ref <= 0.0) return BinaryEdgeMap(img.width(), img.height());
  return canny_from_gradients(g, low_frac * ref, high_frac * ref);
}

/// Union of low-threshold Canny maps over every blur sigma.
[[nodiscard]] inline BinaryEdgeMap overdetect(const GrayImage& img, const CannyParams& p = {}) {
  p.validate();
  BinaryEdgeMap out(img.width(), img.height());
  for (double sigma : p.blur_sigmas) {
    const BinaryEdgeMap c = canny_relative(img, sigma, p.low_frac, p.high_frac);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (out[i] || c[i]) ? 1 : 0;
  }
  return out;
}

}  // namespace crispedge
