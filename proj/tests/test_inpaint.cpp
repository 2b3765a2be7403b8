#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "crispedge/inpaint.hpp"
#include "fixtures.hpp"

using namespace crispedge;
namespace fs = std::filesystem;

namespace {

using fixtures::GapFixture;
using fixtures::random_gap;

fs::path write_script(const fs::path& dir, const std::string& name, const std::string& body) {
  const fs::path p = dir / name;
  std::ofstream(p) << "#!/bin/sh\n" << body << "\n";
  fs::permissions(p, fs::perms::owner_all);
  return p;
}

InpaintRequest line_request() {
  // Row 8 is a Canny line across a 24x16 patch; E has a 10-px gap in it.
  InpaintRequest r{EdgeMap(24, 16), GrayImage(24, 16), BinaryEdgeMap(24, 16), BinaryEdgeMap(24, 16)};
  for (int x = 0; x < 24; ++x) {
    r.canny(x, 8) = 1;
    if (x < 7 || x > 16) r.edge(x, 8) = 1.0;
  }
  for (int y = 5; y <= 11; ++y) {
    for (int x = 7; x <= 16; ++x) r.mask(x, y) = 1;
  }
  return r;
}

}  // namespace

TEST(Geodesic, FillsStraightGapExactly) {
  const InpaintRequest r = line_request();
  const auto res = geodesic_complete(r, Field(24, 16, 1.0));
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 24; ++x) EXPECT_EQ(res.edges(x, y), y == 8 ? 1.0 : 0.0) << x << "," << y;
  }
  ASSERT_EQ(res.paths.size(), 1u);
  EXPECT_EQ(res.unreachable, 0u);
}

TEST(Geodesic, EmptyMaskIsIdentity) {
  InpaintRequest r = line_request();
  r.mask = BinaryEdgeMap(24, 16);
  const auto res = geodesic_complete(r, Field(24, 16, 1.0));
  EXPECT_EQ(res.edges, r.edge);
  EXPECT_EQ(res.endpoints, 0u);
}

TEST(Geodesic, PrefersCheaperOfParallelLines) {
  InpaintRequest r = line_request();
  Field grad(24, 16, 0.05);
  for (int x = 0; x < 24; ++x) {
    r.canny(x, 10) = 1;
    grad(x, 8) = 1.0;
  }
  // Connectors from line A to line B at both gap ends.
  r.canny(7, 9) = 1;
  r.canny(16, 9) = 1;
  const auto res = geodesic_complete(r, grad);
  for (int x = 7; x <= 16; ++x) {
    EXPECT_EQ(res.edges(x, 8), 1.0);
    EXPECT_EQ(res.edges(x, 10), 0.0);
  }
}

TEST(Geodesic, UnreachableEndpointLeavesNoPath) {
  InpaintRequest r = line_request();
  for (int x = 10; x <= 12; ++x) r.canny(x, 8) = 0;
  const auto res = geodesic_complete(r, Field(24, 16, 1.0));
  EXPECT_EQ(res.paths.size(), 0u);
  EXPECT_EQ(res.unreachable, 2u);
  EXPECT_EQ(res.edges, r.edge);
}

TEST(Geodesic, OnlyAddsCannyPixelsInsideMaskHalo) {
  std::mt19937_64 rng(99);
  for (int k = 0; k < 100; ++k) {
    const GapFixture f = random_gap(rng);
    const auto res = geodesic_complete(f.req, f.grad);
    const auto halo = oracle::dilate_direct(f.req.mask, 1, [](int, int) { return true; });
    for (std::size_t i = 0; i < res.edges.size(); ++i) {
      ASSERT_GE(res.edges[i], f.req.edge[i]);
      if (res.edges[i] != f.req.edge[i]) {
        ASSERT_EQ(res.edges[i], 1.0);
        ASSERT_TRUE(f.req.canny[i] && halo[i]);
      }
    }
  }
}

TEST(Geodesic, PathCostsMatchShortestPathOracle) {
  std::mt19937_64 rng(2024);
  int fixtures_with_paths = 0;
  for (int k = 0; k < 200; ++k) {
    const GapFixture f = random_gap(rng);
    const auto res = geodesic_complete(f.req, f.grad);
    if (!res.paths.empty()) ++fixtures_with_paths;
    const auto check = fixtures::check_paths(f, res);
    EXPECT_TRUE(check.endpoints_valid) << "fixture " << k;
    EXPECT_TRUE(check.final_state_matches) << "fixture " << k;
    EXPECT_LE(check.max_error(), 1e-9) << "fixture " << k;
  }
  EXPECT_GE(fixtures_with_paths, 100);
}

TEST(External, CopyStubReturnsInputEdge) {
  TempDir dir;
  const auto stub = write_script(dir.path(), "copy.sh", "cp \"$1\" \"$4\"");
  const InpaintRequest r = line_request();
  const auto res = external_inpaint(r, stub.string(), std::chrono::milliseconds(10000));
  EXPECT_EQ(res.edges, r.edge);
}

TEST(External, FailuresAreDistinct) {
  TempDir dir;
  const InpaintRequest r = line_request();
  const auto ms = std::chrono::milliseconds(10000);
  auto kind_of = [&](const std::string& cmd, std::chrono::milliseconds t) {
    try {
      (void)external_inpaint(r, cmd, t);
    } catch (const ExternalError& e) {
      return static_cast<int>(e.kind());
    }
    return -1;
  };
  const auto fail = write_script(dir.path(), "fail.sh", "echo boom >&2; exit 1");
  const auto slow = write_script(dir.path(), "slow.sh", "sleep 10");
  const auto small = write_script(dir.path(), "small.sh", "printf 'P5\\n3 3\\n255\\n123456789' > \"$4\"");
  const auto none = write_script(dir.path(), "none.sh", "exit 0");
  EXPECT_EQ(kind_of(fail.string(), ms), static_cast<int>(ExternalError::Kind::kNonzeroExit));
  EXPECT_EQ(kind_of(slow.string(), std::chrono::milliseconds(300)), static_cast<int>(ExternalError::Kind::kTimeout));
  EXPECT_EQ(kind_of(small.string(), ms), static_cast<int>(ExternalError::Kind::kMalformedOutput));
  EXPECT_EQ(kind_of(none.string(), ms), static_cast<int>(ExternalError::Kind::kMalformedOutput));
}

TEST(External, TempRootFollowsEnvironment) {
  TempDir outer;
  ::setenv("CRISPEDGE_TMPDIR", outer.path().c_str(), 1);
  EXPECT_EQ(temp_root(), outer.path());
  {
    TempDir inner;
    EXPECT_EQ(inner.path().parent_path(), outer.path());
  }
  ::unsetenv("CRISPEDGE_TMPDIR");
}
