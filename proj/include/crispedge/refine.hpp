#pragma once

// Iterative Canny-guided edge label refinement.
//
// The label Y is intersected with an over-detected Canny map C to get the
// initial edge E. Each round builds an inpainting mask from confident label
// pixels that have no E pixel nearby, inpaints one S x S patch per mask
// component, and keeps only inpainted pixels that lie on C. The loop stops
// when the mask stops losing components, is empty, or after i_max rounds.
// Finally, label pixels off the refined edge are demoted below eta.

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "crispedge/canny.hpp"
#include "crispedge/error.hpp"
#include "crispedge/image.hpp"
#include "crispedge/inpaint.hpp"

namespace crispedge {

/// Granularity of initial-edge dropout: independent pixels, or whole
/// 8-connected edge segments removed until the pixel fraction is reached.
enum class DropoutUnit { kPixels, kSegments };

struct RefineConfig {
  double eta = 0.3;
  int patch_size = 256;
  int i_max = 10;
  /// Chebyshev radius of the "edge nearby" test.
  int neigh_radius = 3;
  /// Disk radius used to grow inpainting pixels into the mask.
  int dilate_radius = 7;
  CannyParams canny;
  /// Value given to label pixels not on the refined edge; must be < eta.
  double unconfident_value = 0.15;
  /// Value given to refined-edge pixels absent from the label. Defaults to eta.
  std::optional<double> new_edge_value;
  /// Fraction of initial-edge pixels randomly removed before iterating
  /// (robustness experiments). 0 disables.
  double initial_dropout = 0.0;
  DropoutUnit dropout_unit = DropoutUnit::kSegments;
  std::uint64_t dropout_seed = 0;
  /// Keep per-iteration inpainting-pixel sets in the trace.
  bool record_masks = false;

  void validate() const {
    if (!(eta > 0.0 && eta < 1.0)) throw InvalidArgument("eta must be in (0,1)");
    if (patch_size < 32) throw InvalidArgument("patch size must be >= 32");
    if (i_max < 1) throw InvalidArgument("i_max must be >= 1");
    if (neigh_radius < 1) throw InvalidArgument("neigh_radius must be >= 1");
    if (dilate_radius < neigh_radius) throw InvalidArgument("dilate_radius must be >= neigh_radius");
    if (!(unconfident_value >= 0.0 && unconfident_value < eta)) {
      throw InvalidArgument("unconfident_value must be in [0, eta)");
    }
    if (new_edge_value && !(*new_edge_value >= eta && *new_edge_value <= 1.0)) {
      throw InvalidArgument("new_edge_value must be in [eta, 1]");
    }
    if (!(initial_dropout >= 0.0 && initial_dropout <= 1.0)) throw InvalidArgument("initial_dropout must be in [0,1]");
    canny.validate();
  }
};

struct IterationRecord {
  std::size_t inpaint_pixels = 0;
  std::size_t mask_pixels = 0;
  int n_connect = 0;
  std::size_t patches = 0;
  std::size_t pixels_added = 0;
  std::size_t endpoints = 0;
  std::size_t unreachable_endpoints = 0;
  std::size_t failed_patches = 0;
};

enum class StopReason { kConverged, kIterationLimit };

[[nodiscard]] inline const char* to_string(StopReason r) {
  return r == StopReason::kConverged ? "converged" : "i_max";
}

struct RefineTrace {
  std::vector<IterationRecord> iterations;
  StopReason reason = StopReason::kIterationLimit;
  std::vector<std::string> failures;
  /// Filled only with RefineConfig::record_masks.
  std::vector<BinaryEdgeMap> inpaint_sets;
};

struct RefineResult {
  EdgeMap label;
  RefineTrace trace;
  BinaryEdgeMap canny;
  /// Final refined edge E.
  EdgeMap edge;
};

/// E = C * Y with sub-eta label values zeroed.
[[nodiscard]] inline EdgeMap initial_edge(const BinaryEdgeMap& canny, const EdgeMap& label, double eta) {
  require_same_shape(canny, label, "initial_edge");
  EdgeMap out(label.width(), label.height());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (canny[i] && label[i] >= eta) ? label[i] : 0.0;
  return out;
}

/// Confident label pixels with no edge pixel within the Chebyshev radius.
[[nodiscard]] inline BinaryEdgeMap inpaint_pixels(const EdgeMap& label, const EdgeMap& edge, double eta, int neigh_radius) {
  require_same_shape(label, edge, "inpaint_pixels");
  const BinaryEdgeMap near = dilate_square(binarize(edge), neigh_radius);
  BinaryEdgeMap out(label.width(), label.height());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (label[i] >= eta && !near[i]) ? 1 : 0;
  return out;
}

[[nodiscard]] inline BinaryEdgeMap create_mask(const EdgeMap& label, const EdgeMap& edge, const RefineConfig& cfg) {
  return dilate_disk(inpaint_pixels(label, edge, cfg.eta, cfg.neigh_radius), cfg.dilate_radius);
}

/// Start coordinate of a length-`size` window centered at `center` and
/// clamped into [0, extent).
[[nodiscard]] inline int centered_start(int center, int size, int extent) {
  if (size >= extent) return 0;
  return std::clamp(center - size / 2, 0, extent - size);
}

/// One S x S rect per mask component, centered on its centroid and clamped
/// inside the image (the whole image when it is smaller than S).
[[nodiscard]] inline std::vector<Rect> create_patches(const BinaryEdgeMap& mask, int patch_size) {
  const Components c = connected_components(mask);
  std::vector<double> sx(static_cast<std::size_t>(c.count) + 1, 0.0);
  std::vector<double> sy(sx.size(), 0.0);
  std::vector<std::size_t> cnt(sx.size(), 0);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      const auto l = static_cast<std::size_t>(c.labels(x, y));
      if (l == 0) continue;
      sx[l] += x;
      sy[l] += y;
      ++cnt[l];
    }
  }
  std::vector<Rect> rects;
  for (std::size_t l = 1; l < sx.size(); ++l) {
    const int cx = static_cast<int>(std::floor(sx[l] / static_cast<double>(cnt[l]) + 0.5));
    const int cy = static_cast<int>(std::floor(sy[l] / static_cast<double>(cnt[l]) + 0.5));
    rects.push_back({centered_start(cx, patch_size, mask.width()), centered_start(cy, patch_size, mask.height()),
                     std::min(patch_size, mask.width()), std::min(patch_size, mask.height())});
  }
  return rects;
}

/// Label pixels on the refined edge are raised to at least eta; label
/// pixels off it are capped at unconfident_value; everything else is 0.
[[nodiscard]] inline EdgeMap post_process(const EdgeMap& label, const EdgeMap& edge, double eta, double unconfident_value,
                                          std::optional<double> new_edge_value = std::nullopt) {
  require_same_shape(label, edge, "post_process");
  EdgeMap out(label.width(), label.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (edge[i] > 0.0) {
      out[i] = (label[i] == 0.0 && new_edge_value) ? *new_edge_value : std::max(label[i], eta);
    } else if (label[i] > 0.0) {
      out[i] = std::min(label[i], unconfident_value);
    }
  }
  return out;
}

namespace detail {

inline void drop_pixels(EdgeMap& e, double fraction, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (double& v : e.values()) {
    if (v <= 0.0) continue;
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (u < fraction) v = 0.0;
  }
}

inline void drop_segments(EdgeMap& e, double fraction, std::uint64_t seed) {
  const Components c = connected_components(binarize(e));
  if (c.count == 0) return;
  std::vector<std::size_t> sizes(static_cast<std::size_t>(c.count) + 1, 0);
  for (int l : c.labels.values()) ++sizes[static_cast<std::size_t>(l)];
  std::vector<int> order(static_cast<std::size_t>(c.count));
  std::iota(order.begin(), order.end(), 1);
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

  const std::size_t total = count_nonzero(e);
  const auto goal = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(total)));
  std::vector<char> drop(sizes.size(), 0);
  std::size_t dropped = 0;
  for (int l : order) {
    if (dropped >= goal) break;
    drop[static_cast<std::size_t>(l)] = 1;
    dropped += sizes[static_cast<std::size_t>(l)];
  }
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (drop[static_cast<std::size_t>(c.labels[i])]) e[i] = 0.0;
  }
}

}  // namespace detail

[[nodiscard]] inline RefineResult refine(const GrayImage& image, const EdgeMap& label, const RefineConfig& cfg,
                                         const InpaintBackend& backend) {
  cfg.validate();
  require_same_shape(image, label, "refine");

  RefineResult r;
  r.canny = overdetect(image, cfg.canny);
  EdgeMap edge = initial_edge(r.canny, label, cfg.eta);
  if (cfg.initial_dropout > 0.0) {
    if (cfg.dropout_unit == DropoutUnit::kPixels) {
      detail::drop_pixels(edge, cfg.initial_dropout, cfg.dropout_seed);
    } else {
      detail::drop_segments(edge, cfg.initial_dropout, cfg.dropout_seed);
    }
  }

  std::optional<int> previous_connect;
  bool stopped = false;
  for (int round = 1; round <= cfg.i_max; ++round) {
    IterationRecord rec;
    const BinaryEdgeMap seeds = inpaint_pixels(label, edge, cfg.eta, cfg.neigh_radius);
    const BinaryEdgeMap mask = dilate_disk(seeds, cfg.dilate_radius);
    rec.inpaint_pixels = count_nonzero(seeds);
    rec.mask_pixels = count_nonzero(mask);
    rec.n_connect = connected_components(mask).count;
    if (cfg.record_masks) r.trace.inpaint_sets.push_back(seeds);

    if (rec.mask_pixels == 0 || (previous_connect && rec.n_connect >= *previous_connect)) {
      r.trace.iterations.push_back(rec);
      stopped = true;
      break;
    }
    previous_connect = rec.n_connect;

    // Every patch reads the same snapshot; results merge by elementwise max.
    const std::vector<Rect> patches = create_patches(mask, cfg.patch_size);
    rec.patches = patches.size();
    EdgeMap next = edge;
    for (const Rect& rect : patches) {
      const BinaryEdgeMap canny_patch = crop(r.canny, rect);
      InpaintRequest req{crop(edge, rect), crop(image, rect), crop(mask, rect), canny_patch};
      try {
        InpaintResult res = backend(req);
        if (!res.edges.same_shape(req.edge)) throw ShapeMismatch("backend returned a patch of the wrong size");
        rec.endpoints += res.endpoints;
        rec.unreachable_endpoints += res.unreachable;
        paste_max(next, hadamard(res.edges, canny_patch), rect);
      } catch (const std::exception& e) {
        ++rec.failed_patches;
        r.trace.failures.push_back("round " + std::to_string(round) + " patch (" + std::to_string(rect.x) + "," +
                                   std::to_string(rect.y) + "): " + e.what());
      }
    }
    for (std::size_t i = 0; i < next.size(); ++i) {
      if (next[i] > 0.0 && edge[i] == 0.0) ++rec.pixels_added;
    }
    edge = std::move(next);
    r.trace.iterations.push_back(rec);
  }
  r.trace.reason = stopped ? StopReason::kConverged : StopReason::kIterationLimit;
  r.label = post_process(label, edge, cfg.eta, cfg.unconfident_value, cfg.new_edge_value);
  r.edge = std::move(edge);
  return r;
}

}  // namespace crispedge
