#pragma once

// Seeded synthetic scenes: piecewise-constant images with known outlines.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "crispedge/canny.hpp"
#include "crispedge/elastic.hpp"
#include "crispedge/image.hpp"

namespace crispedge::synthetic {

/// Square of side `side` centered in a size x size image.
[[nodiscard]] inline GrayImage square_scene(int size = 64, int side = 32, double inside = 0.2, double outside = 0.8) {
  GrayImage img(size, size, outside);
  const int x0 = (size - side) / 2;
  for (int y = x0; y < x0 + side; ++y) {
    for (int x = x0; x < x0 + side; ++x) img(x, y) = inside;
  }
  return img;
}

/// A few rectangles and discs with random gray levels on a random
/// background. Deterministic in `seed`.
[[nodiscard]] inline GrayImage shapes_scene(int width, int height, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  auto range = [&](int lo, int hi) { return lo + static_cast<int>(unit() * (hi - lo + 1)); };

  GrayImage img(width, height, 0.15 + 0.7 * unit());
  const int shapes = range(2, 4);
  for (int s = 0; s < shapes; ++s) {
    double level = 0.1 + 0.8 * unit();
    // Keep neighboring regions distinguishable.
    if (std::abs(level - img(width / 2, height / 2)) < 0.2) level = level > 0.5 ? level - 0.35 : level + 0.35;
    if (unit() < 0.5) {
      const int w = range(width / 5, width / 2);
      const int h = range(height / 5, height / 2);
      const int x0 = range(4, width - w - 4);
      const int y0 = range(4, height - h - 4);
      for (int y = y0; y < y0 + h; ++y) {
        for (int x = x0; x < x0 + w; ++x) img(x, y) = level;
      }
    } else {
      const int r = range(std::min(width, height) / 10, std::min(width, height) / 4);
      const int cx = range(r + 4, width - r - 4);
      const int cy = range(r + 4, height - r - 4);
      for (int y = cy - r; y <= cy + r; ++y) {
        for (int x = cx - r; x <= cx + r; ++x) {
          if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) img(x, y) = level;
        }
      }
    }
  }
  return img;
}

/// Outline a thin-edge detector would report for a piecewise-constant scene.
[[nodiscard]] inline BinaryEdgeMap clean_outline(const GrayImage& img) { return canny_relative(img, 1.0, 0.05, 0.15); }

struct WarpedSquareParams {
  int size = 64;
  int side = 40;
  double alpha = 4.0;
  int annotators = 5;
  double smooth_sigma = 8.0;
};

struct WarpedSquare {
  GrayImage image;
  BinaryEdgeMap clean;
  /// One elastically warped copy of `clean` per annotator.
  std::vector<BinaryEdgeMap> annotators;
  /// Mean of the annotator maps.
  EdgeMap label;
};

/// Square scene whose outline was traced by simulated annotators; annotator
/// k uses field seed `seed + k`.
[[nodiscard]] inline WarpedSquare warped_square(std::uint64_t seed, const WarpedSquareParams& p = {}) {
  WarpedSquare c;
  c.image = square_scene(p.size, p.side);
  c.clean = clean_outline(c.image);
  c.label = EdgeMap(p.size, p.size);
  for (int k = 0; k < p.annotators; ++k) {
    const auto f = make_field(p.size, p.size, p.alpha, p.smooth_sigma, seed + static_cast<std::uint64_t>(k));
    c.annotators.push_back(apply_field(c.clean, f));
    for (std::size_t i = 0; i < c.label.size(); ++i) c.label[i] += c.annotators.back()[i] ? 1.0 : 0.0;
  }
  for (double& v : c.label.values()) v /= p.annotators;
  return c;
}

}  // namespace crispedge::synthetic
