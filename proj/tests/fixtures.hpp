#pragma once

// Random instances shared by the unit tests and the acceptance run.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "crispedge/inpaint.hpp"
#include "crispedge/metrics.hpp"
#include "oracles.hpp"

namespace fixtures {

using namespace crispedge;

struct GapFixture {
  InpaintRequest req;
  Field grad;
};

/// Random edge segments over a random Canny set, with a masked rectangle.
inline GapFixture random_gap(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> size(12, 32);
  const int w = size(rng);
  const int h = size(rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GapFixture f{{EdgeMap(w, h), GrayImage(w, h), BinaryEdgeMap(w, h), BinaryEdgeMap(w, h)}, Field(w, h)};
  for (std::size_t i = 0; i < f.grad.size(); ++i) {
    f.grad[i] = u(rng) < 0.1 ? 0.0 : u(rng);
    f.req.canny[i] = u(rng) < 0.55 ? 1 : 0;
  }
  const int segments = std::uniform_int_distribution<int>(2, 5)(rng);
  for (int s = 0; s < segments; ++s) {
    int x = std::uniform_int_distribution<int>(0, w - 1)(rng);
    int y = std::uniform_int_distribution<int>(0, h - 1)(rng);
    const int dx = std::uniform_int_distribution<int>(-1, 1)(rng);
    const int dy = dx == 0 ? 1 : std::uniform_int_distribution<int>(-1, 1)(rng);
    const int len = std::uniform_int_distribution<int>(2, 7)(rng);
    for (int k = 0; k < len && f.req.edge.in_bounds(x, y); ++k, x += dx, y += dy) {
      f.req.edge(x, y) = 1.0;
      f.req.canny(x, y) = 1;
    }
  }
  const int mx = std::uniform_int_distribution<int>(0, w / 3)(rng);
  const int my = std::uniform_int_distribution<int>(0, h / 3)(rng);
  const int mw = std::uniform_int_distribution<int>(w / 3, w - mx)(rng);
  const int mh = std::uniform_int_distribution<int>(h / 3, h - my)(rng);
  for (int y = my; y < my + mh; ++y) {
    for (int x = mx; x < mx + mw; ++x) f.req.mask(x, y) = 1;
  }
  return f;
}

struct PathCheck {
  /// Oracle shortest cost and reported cost of every path, in order.
  std::vector<double> oracle_cost;
  std::vector<double> reported_cost;
  /// Sum of step costs along each returned pixel chain.
  std::vector<double> walked_cost;
  bool endpoints_valid = true;
  /// Replayed edge state equals the completer output.
  bool final_state_matches = true;

  [[nodiscard]] double max_error() const {
    double e = 0.0;
    for (std::size_t i = 0; i < oracle_cost.size(); ++i) {
      e = std::max({e, std::abs(reported_cost[i] - oracle_cost[i]), std::abs(reported_cost[i] - walked_cost[i])});
    }
    return e;
  }
};

/// Replays the completer's paths in order and recomputes each one's cost
/// with Bellman-Ford over the edge state at that moment.
inline PathCheck check_paths(const GapFixture& f, const InpaintResult& res) {
  const int w = f.req.edge.width();
  const int h = f.req.edge.height();
  const double inf = std::numeric_limits<double>::infinity();
  const auto halo = oracle::dilate_direct(f.req.mask, 1, [](int, int) { return true; });
  const auto initial = oracle::components_by_propagation(binarize(f.req.edge));
  std::vector<int> piece(initial.begin(), initial.end());
  std::map<int, int> parent;
  auto root = [&](int a) {
    while (parent.count(a) && parent[a] != a) a = parent[a];
    return a;
  };
  EdgeMap state = f.req.edge;
  std::vector<double> cost(state.size());
  for (std::size_t i = 0; i < cost.size(); ++i) cost[i] = 1.0 / (1e-3 + f.grad[i]);

  PathCheck out;
  for (const CompletionPath& p : res.paths) {
    const std::size_t s = p.pixels.front();
    const std::size_t t = p.pixels.back();
    const int own = root(piece[s]);
    if (!(state[s] > 0.0) || !(state[t] > 0.0) || root(piece[t]) == own) out.endpoints_valid = false;

    std::vector<char> allowed(state.size(), 0);
    std::vector<char> terminal(state.size(), 0);
    for (std::size_t i = 0; i < state.size(); ++i) {
      if (state[i] > 0.0) {
        terminal[i] = 1;
        allowed[i] = root(piece[i]) != own;
      } else {
        allowed[i] = f.req.canny[i] && halo[i];
      }
    }
    const auto d = oracle::bellman_ford(w, h, s, cost, allowed, terminal);
    double best = inf;
    for (std::size_t i = 0; i < state.size(); ++i) {
      if (terminal[i] && allowed[i]) best = std::min(best, d[i]);
    }
    double along = 0.0;
    for (std::size_t i = 1; i < p.pixels.size(); ++i) along += cost[p.pixels[i]];
    out.oracle_cost.push_back(best);
    out.reported_cost.push_back(p.cost);
    out.walked_cost.push_back(along);

    const int target = root(piece[t]);
    parent[target] = own;
    parent.emplace(own, own);
    for (std::size_t i = 1; i + 1 < p.pixels.size(); ++i) {
      state[p.pixels[i]] = 1.0;
      piece[p.pixels[i]] = own;
    }
  }
  out.final_state_matches = state == res.edges;
  return out;
}

struct MatchInstance {
  std::vector<Pixel> pred;
  std::vector<Pixel> gt;
  double radius;
};

/// Up to 20 distinct points per side on a 12x12 grid.
inline MatchInstance random_match(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(1, 20);
  std::uniform_int_distribution<int> coord(0, 11);
  MatchInstance in;
  in.radius = std::uniform_real_distribution<double>(1.0, 3.0)(rng);
  const int np = count(rng);
  const int ng = count(rng);
  std::set<std::pair<int, int>> seen;
  while (static_cast<int>(in.pred.size()) < np) {
    Pixel p{coord(rng), coord(rng)};
    if (seen.insert({p.x, p.y}).second) in.pred.push_back(p);
  }
  seen.clear();
  while (static_cast<int>(in.gt.size()) < ng) {
    Pixel p{coord(rng), coord(rng)};
    if (seen.insert({p.x, p.y}).second) in.gt.push_back(p);
  }
  return in;
}

inline std::vector<std::vector<int>> adjacency(const MatchInstance& in) {
  std::vector<std::vector<int>> adj(in.pred.size());
  for (std::size_t i = 0; i < in.pred.size(); ++i) {
    for (std::size_t j = 0; j < in.gt.size(); ++j) {
      const double dx = in.pred[i].x - in.gt[j].x;
      const double dy = in.pred[i].y - in.gt[j].y;
      if (dx * dx + dy * dy <= in.radius * in.radius) adj[i].push_back(static_cast<int>(j));
    }
  }
  return adj;
}

}  // namespace fixtures
