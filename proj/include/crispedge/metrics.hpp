#pragma once

// Crispness, the annotator-robust weighted cross-entropy loss, and the
// tolerance-matched precision/recall machinery behind ODS/OIS.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <unordered_set>
#include <vector>

#include "crispedge/error.hpp"
#include "crispedge/image.hpp"
#include "crispedge/nms.hpp"
#include "crispedge/parallel.hpp"

namespace crispedge {

// ---------------------------------------------------------------------------
// Crispness

/// sum(NMS(E)) / sum(E). Throws UndefinedCrispness for zero-mass maps.
[[nodiscard]] inline double crispness(const EdgeMap& e, const NmsParams& p = {}) {
  const double before = sum(e);
  if (!(before > 0.0)) throw UndefinedCrispness("crispness undefined for a map with zero total mass");
  return sum(edge_nms(e, p)) / before;
}

struct CrispnessSummary {
  double average = 0.0;
  std::size_t used = 0;
  std::size_t skipped_zero_maps = 0;
};

/// Mean crispness over the maps with positive mass; zero-mass maps are
/// skipped and counted.
[[nodiscard]] inline CrispnessSummary average_crispness(std::span<const EdgeMap> maps, const NmsParams& p = {}) {
  if (maps.empty()) throw InvalidArgument("average_crispness: no maps");
  CrispnessSummary s;
  double total = 0.0;
  for (const EdgeMap& m : maps) {
    if (!(sum(m) > 0.0)) {
      ++s.skipped_zero_maps;
      continue;
    }
    total += crispness(m, p);
    ++s.used;
  }
  if (s.used == 0) throw UndefinedCrispness("average_crispness: every map has zero mass");
  s.average = total / static_cast<double>(s.used);
  return s;
}

// ---------------------------------------------------------------------------
// Loss

/// Class-balanced cross entropy that ignores ground-truth pixels with
/// 0 < y < eta. Returns the sum over pixels (a nonnegative value).
[[nodiscard]] inline double wbce_loss(const EdgeMap& pred, const EdgeMap& gt, double lambda = 1.1, double eta = 0.3) {
  require_same_shape(pred, gt, "wbce_loss");
  constexpr double kEps = 1e-7;
  std::size_t pos = 0;
  std::size_t neg = 0;
  for (double y : gt.values()) {
    if (y >= eta) {
      ++pos;
    } else if (y == 0.0) {
      ++neg;
    }
  }
  if (pos + neg == 0) throw InvalidArgument("wbce_loss: every ground-truth pixel is ignored");
  const double total = static_cast<double>(pos + neg);
  const double alpha = lambda * static_cast<double>(pos) / total;
  const double beta = static_cast<double>(neg) / total;
  double loss = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const double p = std::clamp(pred[i], kEps, 1.0 - kEps);
    const double y = gt[i];
    if (y == 0.0) {
      loss += alpha * -std::log(1.0 - p);
    } else if (y >= eta) {
      loss += beta * -std::log(p);
    }
  }
  return loss;
}

// ---------------------------------------------------------------------------
// Matching

struct Pixel {
  int x = 0;
  int y = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Matching radius: a fraction of the image diagonal, or an absolute pixel
/// radius when `absolute_px` is set.
struct MatchTolerance {
  double max_dist = 0.0075;
  std::optional<double> absolute_px;

  [[nodiscard]] double radius(int width, int height) const {
    if (absolute_px) return *absolute_px;
    return max_dist * std::sqrt(static_cast<double>(width) * width + static_cast<double>(height) * height);
  }
};

/// Greedy one-to-one matching: candidate pairs within `radius` are taken in
/// order of increasing distance, ties broken by the row-major position of the
/// prediction pixel and then of the ground-truth pixel. Returns, for each
/// prediction point, the index of its partner in `gt` or -1.
[[nodiscard]] inline std::vector<int> greedy_match(std::span<const Pixel> pred, std::span<const Pixel> gt,
                                                   double radius, int width) {
  struct Cand {
    long long d2;
    long long pred_key;
    long long gt_key;
    int pi;
    int gi;
  };
  std::vector<Cand> cands;
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (std::size_t j = 0; j < gt.size(); ++j) {
      const long long dx = pred[i].x - gt[j].x;
      const long long dy = pred[i].y - gt[j].y;
      const long long d2 = dx * dx + dy * dy;
      if (static_cast<double>(d2) <= r2) {
        cands.push_back({d2, static_cast<long long>(pred[i].y) * width + pred[i].x,
                         static_cast<long long>(gt[j].y) * width + gt[j].x, static_cast<int>(i),
                         static_cast<int>(j)});
      }
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    return std::tie(a.d2, a.pred_key, a.gt_key, a.pi, a.gi) < std::tie(b.d2, b.pred_key, b.gt_key, b.pi, b.gi);
  });
  std::vector<int> partner(pred.size(), -1);
  std::vector<char> gt_used(gt.size(), 0);
  for (const Cand& c : cands) {
    if (partner[static_cast<std::size_t>(c.pi)] >= 0 || gt_used[static_cast<std::size_t>(c.gi)]) continue;
    partner[static_cast<std::size_t>(c.pi)] = c.gi;
    gt_used[static_cast<std::size_t>(c.gi)] = 1;
  }
  return partner;
}

namespace detail {

struct Offset {
  int dx;
  int dy;
  long long d2;
};

inline std::vector<Offset> offsets_within(double radius) {
  std::vector<Offset> offs;
  const int r = static_cast<int>(std::floor(radius));
  const double r2 = radius * radius;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const long long d2 = static_cast<long long>(dx) * dx + static_cast<long long>(dy) * dy;
      if (static_cast<double>(d2) <= r2) offs.push_back({dx, dy, d2});
    }
  }
  return offs;
}

/// Raster version of greedy_match: marks matched pred pixels in `pred_hit`
/// and returns the number of matched gt pixels.
inline std::size_t greedy_match_raster(const BinaryEdgeMap& pred, const BinaryEdgeMap& gt,
                                       const std::vector<Offset>& offs, std::vector<char>& pred_hit) {
  struct Cand {
    long long d2;
    std::size_t pi;
    std::size_t gi;
  };
  std::vector<Cand> cands;
  for (int y = 0; y < pred.height(); ++y) {
    for (int x = 0; x < pred.width(); ++x) {
      if (!pred(x, y)) continue;
      for (const Offset& o : offs) {
        const int gx = x + o.dx;
        const int gy = y + o.dy;
        if (gt.in_bounds(gx, gy) && gt(gx, gy)) cands.push_back({o.d2, pred.index(x, y), gt.index(gx, gy)});
      }
    }
  }
  std::sort(cands.begin(), cands.end(),
            [](const Cand& a, const Cand& b) { return std::tie(a.d2, a.pi, a.gi) < std::tie(b.d2, b.pi, b.gi); });
  std::vector<char> pred_used(pred.size(), 0);
  std::vector<char> gt_used(gt.size(), 0);
  std::size_t matched = 0;
  for (const Cand& c : cands) {
    if (pred_used[c.pi] || gt_used[c.gi]) continue;
    pred_used[c.pi] = 1;
    gt_used[c.gi] = 1;
    ++matched;
  }
  for (std::size_t i = 0; i < pred.size(); ++i) pred_hit[i] = pred_used[i];
  return matched;
}

}  // namespace detail

/// Counts behind one precision/recall evaluation.
struct EdgeMatch {
  std::size_t n_pred = 0;
  /// Prediction pixels matched in every label.
  std::size_t tp_pred = 0;
  /// Total ground-truth pixels over all labels.
  std::size_t n_gt = 0;
  /// Matched ground-truth pixels summed over labels.
  std::size_t tp_gt = 0;
  std::vector<std::size_t> matched_per_label;
};

[[nodiscard]] inline EdgeMatch match_edges(const BinaryEdgeMap& pred, std::span<const BinaryEdgeMap> gts,
                                           const MatchTolerance& tol = {}) {
  if (gts.empty()) throw InvalidArgument("match_edges: at least one ground-truth label is required");
  for (const auto& g : gts) require_same_shape(pred, g, "match_edges");
  const double radius = tol.radius(pred.width(), pred.height());
  if (!(radius > 0.0)) throw InvalidArgument("match_edges: matching radius must be positive");
  const auto offs = detail::offsets_within(radius);

  EdgeMatch m;
  m.n_pred = count_nonzero(pred);
  std::vector<std::uint32_t> hits(pred.size(), 0);
  std::vector<char> hit(pred.size(), 0);
  for (const auto& g : gts) {
    const std::size_t matched = detail::greedy_match_raster(pred, g, offs, hit);
    for (std::size_t i = 0; i < hit.size(); ++i) hits[i] += hit[i] ? 1u : 0u;
    m.matched_per_label.push_back(matched);
    m.n_gt += count_nonzero(g);
    m.tp_gt += matched;
  }
  const auto labels = static_cast<std::uint32_t>(gts.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] && hits[i] == labels) ++m.tp_pred;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Benchmark

struct PRPoint {
  double threshold = 0.0;
  std::size_t tp_pred = 0;
  std::size_t n_pred = 0;
  std::size_t tp_gt = 0;
  std::size_t n_gt = 0;

  [[nodiscard]] double precision() const {
    return n_pred == 0 ? 0.0 : static_cast<double>(tp_pred) / static_cast<double>(n_pred);
  }
  [[nodiscard]] double recall() const {
    return n_gt == 0 ? 0.0 : static_cast<double>(tp_gt) / static_cast<double>(n_gt);
  }
  [[nodiscard]] double f() const {
    const double p = precision();
    const double r = recall();
    return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  }
};

[[nodiscard]] inline double f_score(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

/// k/100 for k = 1..99.
[[nodiscard]] inline std::vector<double> default_thresholds() {
  std::vector<double> t;
  for (int k = 1; k <= 99; ++k) t.push_back(k / 100.0);
  return t;
}

struct BenchmarkItem {
  std::string id;
  EdgeMap prediction;
  /// One map per annotator; binarized at > 0 before matching.
  std::vector<EdgeMap> labels;
};

struct BenchmarkOptions {
  std::vector<double> thresholds = default_thresholds();
  MatchTolerance tolerance;
  bool apply_nms = false;
  NmsParams nms;
  std::size_t parallelism = 1;
};

struct ImageCurve {
  std::string id;
  std::vector<PRPoint> points;
  double best_f = 0.0;
  double best_threshold = 0.0;
  std::optional<double> crispness;
};

struct BenchmarkReport {
  std::vector<ImageCurve> images;
  /// Dataset-pooled counts per threshold.
  std::vector<PRPoint> pooled;
  double ods_f = 0.0;
  double ods_threshold = 0.0;
  double ois_f = 0.0;
  std::optional<double> average_crispness;
  std::size_t skipped_zero_maps = 0;
};

[[nodiscard]] inline ImageCurve evaluate_image(const BenchmarkItem& item, const BenchmarkOptions& opt) {
  if (item.labels.empty()) throw InvalidArgument("benchmark: image '" + item.id + "' has no labels");
  for (const auto& l : item.labels) require_same_shape(item.prediction, l, "benchmark");
  ImageCurve curve;
  curve.id = item.id;
  if (sum(item.prediction) > 0.0) curve.crispness = crispness(item.prediction, opt.nms);

  const EdgeMap pred = opt.apply_nms ? edge_nms(item.prediction, opt.nms) : item.prediction;
  std::vector<BinaryEdgeMap> gts;
  gts.reserve(item.labels.size());
  for (const auto& l : item.labels) gts.push_back(binarize(l));

  for (double t : opt.thresholds) {
    const EdgeMatch m = match_edges(threshold_at(pred, t), gts, opt.tolerance);
    PRPoint pt{t, m.tp_pred, m.n_pred, m.tp_gt, m.n_gt};
    if (pt.f() > curve.best_f) {
      curve.best_f = pt.f();
      curve.best_threshold = t;
    }
    curve.points.push_back(pt);
  }
  return curve;
}

/// ODS from counts pooled over images at each threshold; OIS as the mean of
/// per-image best F; average crispness always on the raw predictions.
[[nodiscard]] inline BenchmarkReport benchmark(std::span<const BenchmarkItem> items, const BenchmarkOptions& opt = {}) {
  if (items.empty()) throw InvalidArgument("benchmark: empty dataset");
  if (opt.thresholds.empty()) throw InvalidArgument("benchmark: no thresholds");
  {
    std::unordered_set<std::string> ids;
    for (const auto& it : items) {
      if (!ids.insert(it.id).second) throw InvalidArgument("benchmark: duplicate image id '" + it.id + "'");
    }
  }

  BenchmarkReport r;
  r.images.resize(items.size());
  parallel_for(items.size(), opt.parallelism, [&](std::size_t i) { r.images[i] = evaluate_image(items[i], opt); });

  r.pooled.resize(opt.thresholds.size());
  for (std::size_t k = 0; k < opt.thresholds.size(); ++k) {
    PRPoint& p = r.pooled[k];
    p.threshold = opt.thresholds[k];
    for (const auto& img : r.images) {
      p.tp_pred += img.points[k].tp_pred;
      p.n_pred += img.points[k].n_pred;
      p.tp_gt += img.points[k].tp_gt;
      p.n_gt += img.points[k].n_gt;
    }
    if (p.f() > r.ods_f) {
      r.ods_f = p.f();
      r.ods_threshold = p.threshold;
    }
  }

  double ois = 0.0;
  double ac = 0.0;
  std::size_t used = 0;
  for (const auto& img : r.images) {
    ois += img.best_f;
    if (img.crispness) {
      ac += *img.crispness;
      ++used;
    } else {
      ++r.skipped_zero_maps;
    }
  }
  r.ois_f = ois / static_cast<double>(r.images.size());
  if (used > 0) r.average_crispness = ac / static_cast<double>(used);
  return r;
}

}  // namespace crispedge
