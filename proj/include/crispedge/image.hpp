#pragma once

// Raster value types and the shared primitives used across the toolkit:
// blur, resize, elementwise products, morphology, labeling and patch I/O.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "crispedge/error.hpp"

namespace crispedge {

struct GrayTag {};
struct EdgeTag {};
struct BinaryTag {};
struct FieldTag {};
struct LabelTag {};

/// Row-major 2-D grid. The tag keeps semantically different rasters
/// (photographs, soft edge maps, masks, unconstrained scalar fields) from
/// being mixed up by accident; `retag` converts explicitly.
template <class T, class Tag>
class Grid {
 public:
  using value_type = T;
  using tag_type = Tag;

  Grid() = default;
  Grid(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 1 || height < 1) {
      throw InvalidArgument("grid dimensions must be positive, got " + std::to_string(width) +
                            "x" + std::to_string(height));
    }
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }
  Grid(int width, int height, std::vector<T> data) : width_(width), height_(height), data_(std::move(data)) {
    if (width < 1 || height < 1 ||
        data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
      throw InvalidArgument("grid data length does not match " + std::to_string(width) + "x" +
                            std::to_string(height));
    }
  }

  [[nodiscard]] int width() const noexcept { return width_; }
  [[nodiscard]] int height() const noexcept { return height_; }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

  [[nodiscard]] bool in_bounds(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }
  [[nodiscard]] std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  T& operator()(int x, int y) noexcept { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const noexcept { return data_[index(x, y)]; }
  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  /// Border-replicating access.
  [[nodiscard]] const T& clamped(int x, int y) const noexcept {
    x = std::clamp(x, 0, width_ - 1);
    y = std::clamp(y, 0, height_ - 1);
    return data_[index(x, y)];
  }

  [[nodiscard]] std::span<T> values() noexcept { return data_; }
  [[nodiscard]] std::span<const T> values() const noexcept { return data_; }
  [[nodiscard]] const std::vector<T>& data() const noexcept { return data_; }

  template <class OtherT, class OtherTag>
  [[nodiscard]] bool same_shape(const Grid<OtherT, OtherTag>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Intensities in [0,1].
using GrayImage = Grid<double, GrayTag>;
/// Edge probabilities in [0,1].
using EdgeMap = Grid<double, EdgeTag>;
using BinaryEdgeMap = Grid<std::uint8_t, BinaryTag>;
/// Unconstrained real field (gradients, orientations, displacements).
using Field = Grid<double, FieldTag>;
using LabelMap = Grid<int, LabelTag>;

template <class G>
concept RealGrid = std::is_same_v<typename G::value_type, double>;

template <class To, class T, class Tag>
[[nodiscard]] To retag(const Grid<T, Tag>& g) {
  using V = typename To::value_type;
  std::vector<V> out(g.size());
  std::transform(g.values().begin(), g.values().end(), out.begin(), [](T v) { return static_cast<V>(v); });
  return To(g.width(), g.height(), std::move(out));
}

template <class A, class B>
void require_same_shape(const A& a, const B& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ShapeMismatch(std::string(what) + ": shape mismatch " + std::to_string(a.width()) + "x" +
                        std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                        std::to_string(b.height()));
  }
}

/// True when every sample is finite and inside [0,1].
template <RealGrid G>
[[nodiscard]] bool in_unit_range(const G& g) {
  return std::all_of(g.values().begin(), g.values().end(),
                     [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; });
}

template <RealGrid G>
[[nodiscard]] double sum(const G& g) {
  double s = 0.0;
  for (double v : g.values()) s += v;
  return s;
}

template <class T, class Tag>
[[nodiscard]] std::size_t count_nonzero(const Grid<T, Tag>& g) {
  return static_cast<std::size_t>(
      std::count_if(g.values().begin(), g.values().end(), [](T v) { return v != T{}; }));
}

/// Nonzero -> true.
template <class T, class Tag>
[[nodiscard]] BinaryEdgeMap binarize(const Grid<T, Tag>& g) {
  BinaryEdgeMap out(g.width(), g.height());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[i] != T{} ? 1 : 0;
  return out;
}

/// value >= threshold -> true.
template <RealGrid G>
[[nodiscard]] BinaryEdgeMap threshold_at(const G& g, double threshold) {
  BinaryEdgeMap out(g.width(), g.height());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[i] >= threshold ? 1 : 0;
  return out;
}

[[nodiscard]] inline EdgeMap to_edge_map(const BinaryEdgeMap& b) {
  EdgeMap out(b.width(), b.height());
  for (std::size_t i = 0; i < b.size(); ++i) out[i] = b[i] ? 1.0 : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Convolution

/// Normalized discrete Gaussian, radius ceil(3 sigma).
[[nodiscard]] inline std::vector<double> gaussian_kernel(double sigma) {
  if (sigma < 0.0 || !std::isfinite(sigma)) throw InvalidArgument("gaussian sigma must be >= 0");
  if (sigma == 0.0) return {1.0};
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = w;
    total += w;
  }
  for (double& w : k) w /= total;
  return k;
}

/// Separable Gaussian blur with border replication. sigma == 0 is the identity.
template <RealGrid G>
[[nodiscard]] G gaussian_blur(const G& img, double sigma) {
  const std::vector<double> k = gaussian_kernel(sigma);
  if (k.size() == 1) return img;
  const int r = static_cast<int>(k.size() / 2);
  const int w = img.width();
  const int h = img.height();

  G tmp(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[static_cast<std::size_t>(i + r)] * img.clamped(x + i, y);
      tmp(x, y) = acc;
    }
  }
  G out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[static_cast<std::size_t>(i + r)] * tmp.clamped(x, y + i);
      out(x, y) = acc;
    }
  }
  return out;
}

/// Bilinear resampling with half-pixel-centered sample positions.
template <RealGrid G>
[[nodiscard]] G resize_bilinear(const G& img, int new_w, int new_h) {
  if (new_w < 1 || new_h < 1) throw InvalidArgument("resize target must be at least 1x1");
  if (new_w == img.width() && new_h == img.height()) return img;
  const double sx = static_cast<double>(img.width()) / new_w;
  const double sy = static_cast<double>(img.height()) / new_h;
  G out(new_w, new_h);
  for (int y = 0; y < new_h; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(img.height() - 1));
    const int y0 = static_cast<int>(std::floor(fy));
    const int y1 = std::min(y0 + 1, img.height() - 1);
    const double ty = fy - y0;
    for (int x = 0; x < new_w; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(img.width() - 1));
      const int x0 = static_cast<int>(std::floor(fx));
      const int x1 = std::min(x0 + 1, img.width() - 1);
      const double tx = fx - x0;
      const double top = img(x0, y0) * (1.0 - tx) + img(x1, y0) * tx;
      const double bottom = img(x0, y1) * (1.0 - tx) + img(x1, y1) * tx;
      out(x, y) = top * (1.0 - ty) + bottom * ty;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Elementwise

[[nodiscard]] inline EdgeMap hadamard(const EdgeMap& a, const EdgeMap& b) {
  require_same_shape(a, b, "hadamard");
  EdgeMap out(a.width(), a.height());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

[[nodiscard]] inline EdgeMap hadamard(const EdgeMap& a, const BinaryEdgeMap& b) {
  require_same_shape(a, b, "hadamard");
  EdgeMap out(a.width(), a.height());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = b[i] ? a[i] : 0.0;
  return out;
}

[[nodiscard]] inline BinaryEdgeMap union_of(const BinaryEdgeMap& a, const BinaryEdgeMap& b) {
  require_same_shape(a, b, "union");
  BinaryEdgeMap out(a.width(), a.height());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] || b[i]) ? 1 : 0;
  return out;
}

/// True when every set pixel of `a` is set in `b`.
[[nodiscard]] inline bool is_subset(const BinaryEdgeMap& a, const BinaryEdgeMap& b) {
  require_same_shape(a, b, "is_subset");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] && !b[i]) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Morphology and labeling

/// Offsets (dx, dy) with dx^2 + dy^2 <= radius^2.
[[nodiscard]] inline std::vector<std::pair<int, int>> disk_offsets(int radius) {
  std::vector<std::pair<int, int>> offs;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy <= radius * radius) offs.emplace_back(dx, dy);
    }
  }
  return offs;
}

/// Euclidean-disk dilation. radius 0 is the identity.
[[nodiscard]] inline BinaryEdgeMap dilate_disk(const BinaryEdgeMap& m, int radius) {
  if (radius < 0) throw InvalidArgument("dilation radius must be >= 0");
  if (radius == 0) return m;
  const auto offs = disk_offsets(radius);
  BinaryEdgeMap out(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (!m(x, y)) continue;
      for (auto [dx, dy] : offs) {
        if (out.in_bounds(x + dx, y + dy)) out(x + dx, y + dy) = 1;
      }
    }
  }
  return out;
}

/// Square (Chebyshev) dilation.
[[nodiscard]] inline BinaryEdgeMap dilate_square(const BinaryEdgeMap& m, int radius) {
  if (radius < 0) throw InvalidArgument("dilation radius must be >= 0");
  if (radius == 0) return m;
  const int w = m.width();
  const int h = m.height();
  // Separable running max: rows then columns.
  BinaryEdgeMap rows(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!m(x, y)) continue;
      for (int i = std::max(0, x - radius); i <= std::min(w - 1, x + radius); ++i) rows(i, y) = 1;
    }
  }
  BinaryEdgeMap out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!rows(x, y)) continue;
      for (int j = std::max(0, y - radius); j <= std::min(h - 1, y + radius); ++j) out(x, j) = 1;
    }
  }
  return out;
}

inline constexpr std::pair<int, int> kNeighbors8[8] = {{-1, -1}, {0, -1}, {1, -1}, {-1, 0},
                                                       {1, 0},   {-1, 1}, {0, 1},  {1, 1}};

struct Components {
  LabelMap labels;  // 0 = background, 1..count in row-major discovery order
  int count = 0;
};

/// 8-connected component labeling.
[[nodiscard]] inline Components connected_components(const BinaryEdgeMap& m) {
  Components c{LabelMap(m.width(), m.height(), 0), 0};
  std::deque<std::pair<int, int>> queue;
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (!m(x, y) || c.labels(x, y) != 0) continue;
      const int label = ++c.count;
      c.labels(x, y) = label;
      queue.emplace_back(x, y);
      while (!queue.empty()) {
        auto [cx, cy] = queue.front();
        queue.pop_front();
        for (auto [dx, dy] : kNeighbors8) {
          const int nx = cx + dx;
          const int ny = cy + dy;
          if (m.in_bounds(nx, ny) && m(nx, ny) && c.labels(nx, ny) == 0) {
            c.labels(nx, ny) = label;
            queue.emplace_back(nx, ny);
          }
        }
      }
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Patches

struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  friend bool operator==(const Rect&, const Rect&) = default;
};

/// Intersects `r` with the [0,width) x [0,height) frame.
[[nodiscard]] inline Rect clamp_rect(Rect r, int width, int height) {
  const int x0 = std::clamp(r.x, 0, width);
  const int y0 = std::clamp(r.y, 0, height);
  const int x1 = std::clamp(r.x + r.w, 0, width);
  const int y1 = std::clamp(r.y + r.h, 0, height);
  return {x0, y0, std::max(0, x1 - x0), std::max(0, y1 - y0)};
}

template <class T, class Tag>
[[nodiscard]] Grid<T, Tag> crop(const Grid<T, Tag>& map, Rect r) {
  r = clamp_rect(r, map.width(), map.height());
  if (r.w == 0 || r.h == 0) throw InvalidArgument("crop rectangle lies outside the image");
  Grid<T, Tag> out(r.w, r.h);
  for (int y = 0; y < r.h; ++y) {
    for (int x = 0; x < r.w; ++x) out(x, y) = map(r.x + x, r.y + y);
  }
  return out;
}

/// Writes max(dst, src) into the `r` region of dst. src must be r.w x r.h
/// (before clamping); the parts of `r` outside dst are dropped.
template <class T, class Tag>
void paste_max(Grid<T, Tag>& dst, const Grid<T, Tag>& src, Rect r) {
  if (src.width() != r.w || src.height() != r.h) throw ShapeMismatch("paste_max: source does not match rect");
  const Rect c = clamp_rect(r, dst.width(), dst.height());
  for (int y = c.y; y < c.y + c.h; ++y) {
    for (int x = c.x; x < c.x + c.w; ++x) {
      const T v = src(x - r.x, y - r.y);
      if (v > dst(x, y)) dst(x, y) = v;
    }
  }
}

}  // namespace crispedge
