#pragma once

// Oriented non-maximum suppression for soft edge maps. The orientation comes
// from second derivatives of a smoothed copy of the map; each pixel is then
// compared against bilinear samples along its normal.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "crispedge/error.hpp"
#include "crispedge/image.hpp"

namespace crispedge {

struct NmsParams {
  double orient_sigma = 2.0;
  int suppress_radius = 1;
  /// Multiplier applied to the center value before comparison; > 1 keeps plateaus.
  double boost = 1.01;
  /// Width of the linear attenuation band at the image border. 0 disables it.
  int margin = 0;

  void validate() const {
    if (!(orient_sigma >= 0.0)) throw InvalidArgument("orient_sigma must be >= 0");
    if (suppress_radius < 1) throw InvalidArgument("suppress_radius must be >= 1");
    if (!(boost >= 1.0)) throw InvalidArgument("boost must be >= 1");
    if (margin < 0) throw InvalidArgument("margin must be >= 0");
  }
};

namespace detail {

/// Central differences inside, one-sided at the borders.
inline std::pair<Field, Field> gradient2(const Field& f) {
  const int w = f.width();
  const int h = f.height();
  Field gx(w, h);
  Field gy(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (w > 1) {
        if (x == 0) {
          gx(x, y) = f(1, y) - f(0, y);
        } else if (x == w - 1) {
          gx(x, y) = f(x, y) - f(x - 1, y);
        } else {
          gx(x, y) = 0.5 * (f(x + 1, y) - f(x - 1, y));
        }
      }
      if (h > 1) {
        if (y == 0) {
          gy(x, y) = f(x, 1) - f(x, 0);
        } else if (y == h - 1) {
          gy(x, y) = f(x, y) - f(x, y - 1);
        } else {
          gy(x, y) = 0.5 * (f(x, y + 1) - f(x, y - 1));
        }
      }
    }
  }
  return {std::move(gx), std::move(gy)};
}

inline double interp_clamped(const EdgeMap& e, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(e.width() - 1));
  y = std::clamp(y, 0.0, static_cast<double>(e.height() - 1));
  const int x0 = static_cast<int>(x);
  const int y0 = static_cast<int>(y);
  const int x1 = std::min(x0 + 1, e.width() - 1);
  const int y1 = std::min(y0 + 1, e.height() - 1);
  const double tx = x - x0;
  const double ty = y - y0;
  return e(x0, y0) * (1 - tx) * (1 - ty) + e(x1, y0) * tx * (1 - ty) + e(x0, y1) * (1 - tx) * ty +
         e(x1, y1) * tx * ty;
}

}  // namespace detail

/// Normal direction of the edge at every pixel, in [0, pi). Angle 0 means the
/// normal points along +x (a vertical ridge).
[[nodiscard]] inline Field edge_normal_orientation(const EdgeMap& e, double orient_sigma) {
  const Field smooth = gaussian_blur(retag<Field>(e), orient_sigma);
  const auto [ox, oy] = detail::gradient2(smooth);
  const auto [oxx, unused] = detail::gradient2(ox);
  const auto [oxy, oyy] = detail::gradient2(oy);
  (void)unused;
  Field o(e.width(), e.height());
  for (std::size_t i = 0; i < o.size(); ++i) {
    // sign(-Oxy) with sign(0) = +1, so exactly horizontal ridges get pi/2.
    const double s = oxy[i] > 0.0 ? -1.0 : 1.0;
    double a = std::atan(oyy[i] * s / (oxx[i] + 1e-5));
    a = std::fmod(a, std::numbers::pi);
    if (a < 0.0) a += std::numbers::pi;
    o[i] = a;
  }
  return o;
}

/// Thins a soft edge map. Kept pixels retain their exact input value, so the
/// output support is a subset of the input support and its mass never grows
/// (with margin == 0).
[[nodiscard]] inline EdgeMap edge_nms(const EdgeMap& e, const NmsParams& p = {}) {
  p.validate();
  const Field o = edge_normal_orientation(e, p.orient_sigma);
  EdgeMap out(e.width(), e.height());
  for (int y = 0; y < e.height(); ++y) {
    for (int x = 0; x < e.width(); ++x) {
      const double v = e(x, y);
      if (v == 0.0) continue;
      const double boosted = v * p.boost;
      const double c = std::cos(o(x, y));
      const double s = std::sin(o(x, y));
      bool keep = true;
      for (int d = -p.suppress_radius; d <= p.suppress_radius && keep; ++d) {
        if (d == 0) continue;
        if (boosted < detail::interp_clamped(e, x + d * c, y + d * s)) keep = false;
      }
      if (keep) out(x, y) = v;
    }
  }

  if (p.margin > 0) {
    const int w = e.width();
    const int h = e.height();
    const int m = std::min({p.margin, w / 2, h / 2});
    for (int k = 0; k < m; ++k) {
      const double f = static_cast<double>(k) / m;
      for (int y = 0; y < h; ++y) {
        out(k, y) *= f;
        out(w - 1 - k, y) *= f;
      }
      for (int x = 0; x < w; ++x) {
        out(x, k) *= f;
        out(x, h - 1 - k) *= f;
      }
    }
  }
  return out;
}

}  // namespace crispedge
