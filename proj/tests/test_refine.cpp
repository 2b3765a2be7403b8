#include <gtest/gtest.h>

#include "crispedge/metrics.hpp"
#include "crispedge/refine.hpp"
#include "crispedge/synthetic.hpp"
#include "oracles.hpp"

using namespace crispedge;

namespace {

BinaryEdgeMap shifted(const BinaryEdgeMap& m, int dx, int dy) {
  BinaryEdgeMap out(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (m(x, y) && out.in_bounds(x + dx, y + dy)) out(x + dx, y + dy) = 1;
    }
  }
  return out;
}

/// Refinement inputs of the property corpus: squares and shape scenes with
/// warped outlines.
std::vector<std::pair<GrayImage, EdgeMap>> property_corpus() {
  std::vector<std::pair<GrayImage, EdgeMap>> out;
  for (std::uint64_t s = 0; s < 6; ++s) {
    const auto sq = synthetic::warped_square(500 + 10 * s);
    out.emplace_back(sq.image, sq.label);
    const GrayImage img = synthetic::shapes_scene(64, 64, s);
    out.emplace_back(img, simulate_annotators(synthetic::clean_outline(img), 3.0, 3, 900 + s, 8.0));
  }
  return out;
}

InpaintBackend failing_backend() {
  return [](const InpaintRequest&) -> InpaintResult { throw Error("backend unavailable"); };
}

}  // namespace

TEST(InitialEdge, Examples) {
  const auto c = synthetic::clean_outline(synthetic::square_scene());
  EXPECT_EQ(initial_edge(c, to_edge_map(c), 0.3), to_edge_map(c));
  EXPECT_EQ(count_nonzero(initial_edge(c, EdgeMap(64, 64, 0.29), 0.3)), 0u);

  // Shifted outline: E is exactly the set intersection.
  const auto s = shifted(c, 2, 2);
  const EdgeMap e = initial_edge(c, to_edge_map(s), 0.3);
  std::size_t crossings = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(e[i] > 0.0, c[i] && s[i]);
    crossings += (c[i] && s[i]) ? 1 : 0;
  }
  EXPECT_GT(crossings, 0u);
  EXPECT_LT(crossings, 8u);
  EXPECT_THROW((void)initial_edge(c, EdgeMap(3, 3), 0.3), ShapeMismatch);
}

TEST(Mask, Examples) {
  RefineConfig cfg;
  const auto c = synthetic::clean_outline(synthetic::square_scene());
  EXPECT_EQ(count_nonzero(create_mask(to_edge_map(c), to_edge_map(c), cfg)), 0u);

  EdgeMap y(40, 40);
  y(20, 20) = 1.0;
  BinaryEdgeMap seed(40, 40);
  seed(20, 20) = 1;
  EXPECT_EQ(create_mask(y, EdgeMap(40, 40), cfg), dilate_disk(seed, cfg.dilate_radius));
}

TEST(Mask, ShiftedOutlineFollowsTheRule) {
  RefineConfig cfg;
  const auto c = synthetic::clean_outline(synthetic::square_scene());
  const EdgeMap y = to_edge_map(shifted(c, 4, 4));
  const EdgeMap e = initial_edge(c, y, cfg.eta);
  const auto seeds = inpaint_pixels(y, e, cfg.eta, cfg.neigh_radius);
  for (int py = 0; py < 64; ++py) {
    for (int px = 0; px < 64; ++px) {
      bool near = false;
      for (int dy = -3; dy <= 3; ++dy) {
        for (int dx = -3; dx <= 3; ++dx) near |= e.in_bounds(px + dx, py + dy) && e(px + dx, py + dy) > 0.0;
      }
      EXPECT_EQ(seeds(px, py) == 1, y(px, py) >= cfg.eta && !near);
    }
  }
  EXPECT_EQ(create_mask(y, e, cfg), dilate_disk(seeds, cfg.dilate_radius));
}

TEST(Patches, Placement) {
  EXPECT_TRUE(create_patches(BinaryEdgeMap(100, 100), 32).empty());
  BinaryEdgeMap center(100, 100);
  center(50, 50) = 1;
  center(51, 50) = 1;
  const auto r1 = create_patches(center, 32);
  ASSERT_EQ(r1.size(), 1u);
  // Centroid x = 50.5 rounds to 51; start = 51 - 16.
  EXPECT_EQ(r1[0], (Rect{35, 34, 32, 32}));
  BinaryEdgeMap corner(100, 100);
  corner(1, 98) = 1;
  EXPECT_EQ(create_patches(corner, 32)[0], (Rect{0, 68, 32, 32}));
  EXPECT_EQ(create_patches(corner, 256)[0], (Rect{0, 0, 100, 100}));
}

TEST(PostProcess, ThreePixels) {
  EdgeMap y(3, 1);
  y[0] = 0.2;
  y[1] = 0.8;
  EdgeMap e(3, 1);
  e[0] = 1.0;
  const EdgeMap out = post_process(y, e, 0.3, 0.15);
  EXPECT_EQ(out[0], 0.3);
  EXPECT_EQ(out[1], 0.15);
  EXPECT_EQ(out[2], 0.0);
  EdgeMap novel(3, 1);
  novel[2] = 1.0;
  EXPECT_EQ(post_process(y, novel, 0.3, 0.15)[2], 0.3);
  EXPECT_EQ(post_process(y, novel, 0.3, 0.15, 1.0)[2], 1.0);
}

TEST(PostProcess, CoverageAndDemotion) {
  const auto c = synthetic::clean_outline(synthetic::square_scene());
  EdgeMap y = to_edge_map(c);
  for (double& v : y.values()) v *= 0.2;
  const EdgeMap up = post_process(y, to_edge_map(c), 0.3, 0.15);
  const EdgeMap down = post_process(y, EdgeMap(64, 64), 0.3, 0.15);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] > 0.0) {
      EXPECT_GE(up[i], 0.3);
      EXPECT_LE(down[i], 0.15);
    }
  }
}

TEST(Refine, CannyLabelIsAFixedPoint) {
  const GrayImage img = synthetic::square_scene();
  RefineConfig cfg;
  const EdgeMap y = to_edge_map(overdetect(img, cfg.canny));
  const auto r = refine(img, y, cfg, geodesic_backend());
  EXPECT_EQ(r.label, y);
  ASSERT_EQ(r.trace.iterations.size(), 1u);
  EXPECT_EQ(r.trace.reason, StopReason::kConverged);
  EXPECT_EQ(r.trace.iterations[0].pixels_added, 0u);
}

TEST(Refine, SingleIterationLimit) {
  const auto sq = synthetic::warped_square(1000);
  RefineConfig cfg;
  cfg.i_max = 1;
  const auto r = refine(sq.image, sq.label, cfg, geodesic_backend());
  ASSERT_EQ(r.trace.iterations.size(), 1u);
  EXPECT_GT(r.trace.iterations[0].mask_pixels, 0u);
  EXPECT_EQ(r.trace.reason, StopReason::kIterationLimit);
}

TEST(Refine, RecoversWarpedSquare) {
  const auto sq = synthetic::warped_square(1000);
  const auto r = refine(sq.image, sq.label, RefineConfig{}, geodesic_backend());
  MatchTolerance tol;
  tol.absolute_px = 1.0;
  const std::vector<BinaryEdgeMap> gt{sq.clean};
  const auto before = match_edges(binarize(sq.label), gt, tol);
  const auto after = match_edges(threshold_at(r.label, 0.3), gt, tol);
  const PRPoint b{0, before.tp_pred, before.n_pred, before.tp_gt, before.n_gt};
  const PRPoint a{0, after.tp_pred, after.n_pred, after.tp_gt, after.n_gt};
  EXPECT_GT(a.f(), b.f() + 0.2);
}

TEST(Refine, PropertiesOnCorpus) {
  RefineConfig cfg;
  cfg.record_masks = true;
  for (const auto& [img, y] : property_corpus()) {
    const auto r = refine(img, y, cfg, geodesic_backend());
    // Canny containment.
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (r.label[i] >= cfg.eta) {
        ASSERT_TRUE(r.canny[i]);
      }
    }
    // Termination and monotone masks.
    ASSERT_LE(r.trace.iterations.size(), static_cast<std::size_t>(cfg.i_max));
    for (std::size_t k = 1; k < r.trace.iterations.size(); ++k) {
      EXPECT_LE(r.trace.iterations[k].mask_pixels, r.trace.iterations[k - 1].mask_pixels);
      EXPECT_TRUE(is_subset(r.trace.inpaint_sets[k], r.trace.inpaint_sets[k - 1]));
    }
    // Idempotence.
    const auto again = refine(img, r.label, cfg, geodesic_backend());
    EXPECT_EQ(again.label, r.label);
    for (const auto& it : again.trace.iterations) EXPECT_EQ(it.pixels_added, 0u);
  }
}

TEST(Refine, BackendFailureLeavesPatchUnchanged) {
  const auto sq = synthetic::warped_square(1010);
  RefineConfig cfg;
  const auto r = refine(sq.image, sq.label, cfg, failing_backend());
  ASSERT_FALSE(r.trace.failures.empty());
  EXPECT_GT(r.trace.iterations[0].failed_patches, 0u);
  EXPECT_EQ(r.edge, initial_edge(r.canny, sq.label, cfg.eta));
}

TEST(Refine, WrongSizedBackendOutputIsAFailure) {
  const auto sq = synthetic::warped_square(1020);
  const InpaintBackend bad = [](const InpaintRequest&) {
    InpaintResult res;
    res.edges = EdgeMap(3, 3);
    return res;
  };
  const auto r = refine(sq.image, sq.label, RefineConfig{}, bad);
  EXPECT_GT(r.trace.iterations[0].failed_patches, 0u);
}

TEST(Refine, HeavyDropoutDegradesGracefully) {
  const auto sq = synthetic::warped_square(1030);
  for (DropoutUnit unit : {DropoutUnit::kPixels, DropoutUnit::kSegments}) {
    RefineConfig cfg;
    cfg.initial_dropout = 0.9;
    cfg.dropout_unit = unit;
    cfg.dropout_seed = 4;
    const auto r = refine(sq.image, sq.label, cfg, geodesic_backend());
    EXPECT_LE(r.trace.iterations.size(), 10u);
    std::size_t endpoints = 0;
    for (const auto& it : r.trace.iterations) endpoints += it.endpoints;
    EXPECT_GT(endpoints, 0u);
  }
}

TEST(Refine, SegmentDropoutRemovesWholeComponents) {
  const auto c = synthetic::clean_outline(synthetic::shapes_scene(64, 64, 3));
  EdgeMap e = to_edge_map(c);
  detail::drop_segments(e, 0.5, 1);
  const Components before = connected_components(c);
  std::vector<int> kept(static_cast<std::size_t>(before.count) + 1, -1);
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (!c[i]) continue;
    const int k = e[i] > 0.0 ? 1 : 0;
    auto& slot = kept[static_cast<std::size_t>(before.labels[i])];
    if (slot < 0) slot = k;
    EXPECT_EQ(slot, k);
  }
  EXPECT_GE(count_nonzero(c) - count_nonzero(e), count_nonzero(c) / 2);
}

TEST(Refine, ConfigValidation) {
  RefineConfig cfg;
  cfg.patch_size = 16;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = RefineConfig{};
  cfg.unconfident_value = 0.3;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = RefineConfig{};
  cfg.dilate_radius = 2;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  EXPECT_THROW((void)refine(GrayImage(8, 8), EdgeMap(9, 9), RefineConfig{}, geodesic_backend()), ShapeMismatch);
}
