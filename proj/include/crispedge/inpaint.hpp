#pragma once

// Edge inpainting backends: a geodesic completer that bridges gaps in the
// edge map along Canny pixels, and an external-process hook for learned
// models.

#include <chrono>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "crispedge/canny.hpp"
#include "crispedge/error.hpp"
#include "crispedge/image.hpp"
#include "crispedge/image_io.hpp"
#include "crispedge/process.hpp"

namespace crispedge {

struct InpaintRequest {
  EdgeMap edge;
  GrayImage gray;
  BinaryEdgeMap mask;
  /// Guidance: the completer only walks these pixels.
  BinaryEdgeMap canny;

  void validate() const {
    require_same_shape(edge, gray, "inpaint request");
    require_same_shape(edge, mask, "inpaint request");
    require_same_shape(edge, canny, "inpaint request");
  }
};

struct CompletionPath {
  /// Linear pixel indices from the endpoint to the target, both inclusive.
  std::vector<std::size_t> pixels;
  double cost = 0.0;
};

struct InpaintResult {
  EdgeMap edges;
  std::size_t endpoints = 0;
  std::size_t unreachable = 0;
  std::vector<CompletionPath> paths;
  std::string log;
};

using InpaintBackend = std::function<InpaintResult(const InpaintRequest&)>;

inline constexpr double kGeodesicEps = 1e-3;

/// Cost of stepping onto a pixel with gradient magnitude `grad`.
[[nodiscard]] inline double step_cost(double grad) { return 1.0 / (kGeodesicEps + grad); }

namespace detail {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }
  std::size_t find(std::size_t a) {
    while (parent_[a] != a) a = parent_[a] = parent_[parent_[a]];
    return a;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace detail

/// Endpoints are edge pixels on or next to the mask with at most one edge
/// neighbor. From each (row-major order) a least-cost path is searched over
/// Canny pixels inside mask + 1-px halo to the nearest edge pixel of another
/// connected piece; found paths are written at 1.0.
[[nodiscard]] inline InpaintResult geodesic_complete(const InpaintRequest& req, const Field& grad) {
  req.validate();
  require_same_shape(req.edge, grad, "geodesic_complete");
  const int w = req.edge.width();
  const int h = req.edge.height();
  const std::size_t n = req.edge.size();

  InpaintResult res;
  res.edges = req.edge;
  EdgeMap& out = res.edges;

  const BinaryEdgeMap halo = dilate_square(req.mask, 1);
  auto domain = [&](std::size_t i) { return req.canny[i] && halo[i]; };
  auto positive = [&](std::size_t i) { return out[i] > 0.0; };

  // Component id per edge pixel, merged as paths are written.
  const Components initial = connected_components(binarize(req.edge));
  detail::DisjointSets sets(static_cast<std::size_t>(initial.count) + 1);
  std::vector<std::size_t> comp(n, 0);
  for (std::size_t i = 0; i < n; ++i) comp[i] = static_cast<std::size_t>(initial.labels[i]);

  auto edge_neighbors = [&](int x, int y) {
    int c = 0;
    for (auto [dx, dy] : kNeighbors8) {
      if (out.in_bounds(x + dx, y + dy) && positive(out.index(x + dx, y + dy))) ++c;
    }
    return c;
  };
  auto touches_mask = [&](int x, int y) {
    if (req.mask(x, y)) return true;
    for (auto [dx, dy] : kNeighbors8) {
      if (req.mask.in_bounds(x + dx, y + dy) && req.mask(x + dx, y + dy)) return true;
    }
    return false;
  };

  std::vector<std::size_t> candidates;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (req.edge(x, y) > 0.0 && touches_mask(x, y) && edge_neighbors(x, y) <= 1) candidates.push_back(req.edge.index(x, y));
    }
  }
  res.endpoints = candidates.size();

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, inf);
  std::vector<std::size_t> parent(n, n);
  std::vector<std::size_t> touched;
  using Item = std::pair<double, std::size_t>;

  for (std::size_t s : candidates) {
    const int sx = static_cast<int>(s % static_cast<std::size_t>(w));
    const int sy = static_cast<int>(s / static_cast<std::size_t>(w));
    // An earlier path may have already joined this endpoint to a neighbor.
    if (edge_neighbors(sx, sy) > 1) continue;
    const std::size_t own = sets.find(comp[s]);

    for (std::size_t i : touched) {
      dist[i] = inf;
      parent[i] = n;
    }
    touched.clear();
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[s] = 0.0;
    touched.push_back(s);
    pq.emplace(0.0, s);
    std::size_t found = n;
    while (!pq.empty()) {
      const auto [d, u] = pq.top();
      pq.pop();
      if (d > dist[u]) continue;
      if (u != s && positive(u)) {
        found = u;
        break;
      }
      const int ux = static_cast<int>(u % static_cast<std::size_t>(w));
      const int uy = static_cast<int>(u / static_cast<std::size_t>(w));
      for (auto [dx, dy] : kNeighbors8) {
        const int vx = ux + dx;
        const int vy = uy + dy;
        if (!out.in_bounds(vx, vy)) continue;
        const std::size_t v = out.index(vx, vy);
        if (positive(v)) {
          if (sets.find(comp[v]) == own) continue;
        } else if (!domain(v)) {
          continue;
        }
        const double nd = d + step_cost(grad[v]);
        if (nd < dist[v]) {
          if (dist[v] == inf) touched.push_back(v);
          dist[v] = nd;
          parent[v] = u;
          pq.emplace(nd, v);
        }
      }
    }
    if (found == n) {
      ++res.unreachable;
      continue;
    }

    CompletionPath path;
    path.cost = dist[found];
    for (std::size_t v = found; v != n; v = parent[v]) path.pixels.push_back(v);
    std::reverse(path.pixels.begin(), path.pixels.end());
    sets.unite(own, comp[found]);
    for (std::size_t k = 1; k + 1 < path.pixels.size(); ++k) {
      out[path.pixels[k]] = 1.0;
      comp[path.pixels[k]] = own;
    }
    res.paths.push_back(std::move(path));
  }
  return res;
}

/// Geodesic completer with Sobel magnitude of the gray patch as the gradient.
[[nodiscard]] inline InpaintBackend geodesic_backend() {
  return [](const InpaintRequest& req) { return geodesic_complete(req, sobel_gradients(req.gray).magnitude); };
}

/// Hands the patch to an external program: argv = [edge.pgm, gray.pgm,
/// mask.pgm, out.pgm], all 8-bit P5. Throws ExternalError on launch failure,
/// nonzero exit, timeout, or an unreadable / wrongly sized output.
[[nodiscard]] inline InpaintResult external_inpaint(const InpaintRequest& req, const std::string& command,
                                                    std::chrono::milliseconds timeout) {
  req.validate();
  TempDir dir;
  const auto edge_path = dir.path() / "edge.pgm";
  const auto gray_path = dir.path() / "gray.pgm";
  const auto mask_path = dir.path() / "mask.pgm";
  const auto out_path = dir.path() / "out.pgm";
  save_image(req.edge, edge_path);
  save_image(req.gray, gray_path);
  save_image(req.mask, mask_path);

  const ProcessResult pr = run_process(command, {edge_path.string(), gray_path.string(), mask_path.string(), out_path.string()},
                                       timeout, dir.path() / "log.txt");
  if (pr.timed_out) throw ExternalError(ExternalError::Kind::kTimeout, "external inpainter timed out: " + command);
  if (pr.exit_code != 0) {
    throw ExternalError(ExternalError::Kind::kNonzeroExit,
                        "external inpainter exited with " + std::to_string(pr.exit_code) + ": " + pr.output);
  }
  InpaintResult res;
  res.log = pr.output;
  try {
    res.edges = load_edge(out_path);
  } catch (const Error& e) {
    throw ExternalError(ExternalError::Kind::kMalformedOutput, std::string("external inpainter output unreadable: ") + e.what());
  }
  if (!res.edges.same_shape(req.edge)) {
    throw ExternalError(ExternalError::Kind::kMalformedOutput, "external inpainter output has the wrong size");
  }
  for (double& v : res.edges.values()) v = std::clamp(v, 0.0, 1.0);
  return res;
}

[[nodiscard]] inline InpaintBackend external_backend(std::string command, std::chrono::milliseconds timeout) {
  return [command = std::move(command), timeout](const InpaintRequest& req) {
    return external_inpaint(req, command, timeout);
  };
}

}  // namespace crispedge
