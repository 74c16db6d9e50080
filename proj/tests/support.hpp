// Shared fixtures and brute-force oracles for the test binaries.
#pragma once

#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "plgrim/belief.hpp"
#include "plgrim/gcp.hpp"
#include "plgrim/grid_map.hpp"
#include "plgrim/params.hpp"
#include "plgrim/rng.hpp"

namespace support {

using namespace plgrim;

inline std::string fixture_path(const std::string& name) { return std::string(PLGRIM_FIXTURES) + "/" + name; }

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline GridMap fixture(const std::string& name) { return load_map(read_text(fixture_path(name))); }

/// Belief that already knows every cell where `known` holds, with the true
/// hazard as a confident risk estimate. Known Free cells are covered unless
/// `uncovered` says otherwise.
inline Belief known_belief(const GridMap& w, Cell robot, const Params& p,
                           const std::function<bool(Cell)>& known = [](Cell) { return true; },
                           const std::function<bool(Cell)>& uncovered = [](Cell) { return false; }) {
  Belief b(w.width(), w.height(), w.cell_size(), p.risk, RobotState{robot, 0.0, p.grid.speed});
  for (int y = 0; y < w.height(); ++y)
    for (int x = 0; x < w.width(); ++x) {
      const Cell c{x, y};
      if (!known(c)) continue;
      if (w.is_free(c)) {
        b.set_known(c, Knowledge::Free);
        b.set_covered(c, !uncovered(c));
        b.risk().set_estimate(c, RiskEstimate{w.hazard(c), p.risk.sigma_min, 1.0, 0});
      } else {
        b.set_known(c, Knowledge::Occupied);
      }
    }
  return b;
}

/// Random map with Occupied density `fill`, every cell drawn independently.
inline GridMap random_map(int w, int h, double fill, Rng& rng, double hazard_fill = 0.0) {
  GridMap m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (rng.bernoulli(fill)) {
        m.set_occupied({x, y});
      } else {
        const double hz = rng.bernoulli(hazard_fill) ? static_cast<double>(1 + rng.below(9)) / 10.0 : 0.0;
        m.set_free({x, y}, hz);
      }
    }
  return m;
}

/// Cells whose closed unit square meets the segment between the centers of a
/// and b. Exact: every bound is a rational compared by cross-multiplication.
inline std::vector<Cell> touched_cells(Cell a, Cell b) {
  std::vector<Cell> out;
  const long long dx = b.x - a.x, dy = b.y - a.y;
  const int x0 = std::min(a.x, b.x), x1 = std::max(a.x, b.x);
  const int y0 = std::min(a.y, b.y), y1 = std::max(a.y, b.y);
  // t-interval (as num/den pairs, den > 0) where |2(a + t d) - 2c| <= 1 on one axis.
  struct Frac {
    long long n, d;
  };
  const auto less_eq = [](Frac p, Frac q) { return p.n * q.d <= q.n * p.d; };
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      Frac lo{0, 1}, hi{1, 1};
      bool ok = true;
      const auto clip = [&](long long ac, long long c, long long d) {
        if (d == 0) {
          if (2 * (ac - c) > 1 || 2 * (ac - c) < -1) ok = false;
          return;
        }
        // 2ac + 2td - 2c in [-1, 1]  =>  t in [(2c - 2ac - 1) / 2d, (2c - 2ac + 1) / 2d]
        Frac p{2 * c - 2 * ac - 1, 2 * d}, q{2 * c - 2 * ac + 1, 2 * d};
        if (d < 0) {
          p = {-p.n, -p.d};
          q = {-q.n, -q.d};
          std::swap(p, q);
        }
        if (less_eq(lo, p)) lo = p;
        if (less_eq(q, hi)) hi = q;
      };
      clip(a.x, x, dx);
      clip(a.y, y, dy);
      if (ok && less_eq(lo, hi)) out.push_back({x, y});
    }
  return out;
}

inline bool los_oracle(const GridMap& m, Cell a, Cell b) {
  for (Cell c : touched_cells(a, b))
    if (c != a && c != b && !m.is_free(c)) return false;
  return true;
}

/// All-pairs relaxation over the believed lattice with the edge rules restated
/// from scratch: known-Free ends, no diagonal past a known-Occupied corner,
/// closed CVaR threshold, length * (1 + lambda * mean CVaR).
inline std::vector<double> bellman_ford_costs(const Belief& b, Cell from) {
  const int w = b.width(), h = b.height();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> d(static_cast<std::size_t>(w) * h, inf);
  d[b.index(from)] = 0.0;
  const auto& r = b.risk();
  for (bool changed = true; changed;) {
    changed = false;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const Cell u{x, y};
        if (d[b.index(u)] == inf) continue;
        for (int ddy = -1; ddy <= 1; ++ddy)
          for (int ddx = -1; ddx <= 1; ++ddx) {
            const Cell v{x + ddx, y + ddy};
            if ((ddx == 0 && ddy == 0) || !b.in_bounds(v)) continue;
            if (b.known(u) != Knowledge::Free || b.known(v) != Knowledge::Free) continue;
            if (ddx != 0 && ddy != 0 &&
                (b.known({v.x, u.y}) == Knowledge::Occupied || b.known({u.x, v.y}) == Knowledge::Occupied))
              continue;
            if (r.cvar(u) > r.r_max() || r.cvar(v) > r.r_max()) continue;
            const double len = (ddx != 0 && ddy != 0 ? std::sqrt(2.0) : 1.0) * b.cell_size();
            const double c = d[b.index(u)] + len * (1.0 + r.params().lambda_risk * 0.5 * (r.cvar(u) + r.cvar(v)));
            if (c < d[b.index(v)] - 1e-12) {
              d[b.index(v)] = c;
              changed = true;
            }
          }
      }
  }
  return d;
}

/// Optimal discounted value of each first macro action on a window where
/// every cell is known, found by trying every action sequence. Moves,
/// sensing and rewards are restated from the world map and the belief:
/// a move stays in the window, lands on a Free cell, does not cut an
/// Occupied corner and keeps both ends under the CVaR threshold; a step
/// covers every Free window cell the sensor sees from the new cell unless
/// the belief has already sensed from there.
inline std::vector<std::optional<double>> window_values(const GridMap& world, const Belief& b,
                                                        const std::vector<std::vector<Cell>>& actions,
                                                        int radius, double r_sense, const LcpParams& lp,
                                                        int depth) {
  const Cell center = b.robot().cell;
  const auto& r = b.risk();
  const auto legal = [&](Cell u, Cell v) {
    if (chebyshev(v, center) > radius || !world.is_free(v)) return false;
    if (u.x != v.x && u.y != v.y && (!world.is_free({v.x, u.y}) || !world.is_free({u.x, v.y}))) return false;
    return r.cvar(u) <= r.r_max() && r.cvar(v) <= r.r_max();
  };
  std::vector<std::uint8_t> start(world.size(), 0);
  for (int y = 0; y < world.height(); ++y)
    for (int x = 0; x < world.width(); ++x) start[world.index({x, y})] = b.covered({x, y});

  // Reward and end cell of one action; `cov` is updated in place.
  const auto run = [&](Cell q, const std::vector<Cell>& moves, std::vector<std::uint8_t>& cov) {
    double cost = 0.0;
    int gained = 0;
    for (Cell mv : moves) {
      const Cell v = q + mv;
      if (!legal(q, v)) break;
      const double len = (mv.x != 0 && mv.y != 0 ? std::sqrt(2.0) : 1.0) * world.cell_size();
      cost += len * (1.0 + r.params().lambda_risk * 0.5 * (r.cvar(q) + r.cvar(v)));
      q = v;
      if (b.viewed_from(q)) continue;
      for (const auto& s : sense(world, RobotState{q}, r_sense).sensed) {
        if (s.occupancy != Occupancy::Free || chebyshev(s.cell, center) > radius) continue;
        auto& bit = cov[world.index(s.cell)];
        if (!bit) {
          bit = 1;
          ++gained;
        }
      }
    }
    return std::pair{lp.lambda_i * gained - lp.lambda_c * cost, q};
  };
  std::function<double(Cell, const std::vector<std::uint8_t>&, int)> best =
      [&](Cell q, const std::vector<std::uint8_t>& cov, int left) {
        if (left == 0) return 0.0;
        double v = -std::numeric_limits<double>::infinity();
        for (const auto& a : actions) {
          if (!legal(q, q + a.front())) continue;
          auto next = cov;
          const auto [rew, end] = run(q, a, next);
          v = std::max(v, rew + lp.gamma * best(end, next, left - 1));
        }
        return v == -std::numeric_limits<double>::infinity() ? 0.0 : v;
      };
  std::vector<std::optional<double>> out;
  for (const auto& a : actions) {
    if (!legal(center, center + a.front())) {
      out.emplace_back();
      continue;
    }
    auto next = start;
    const auto [rew, end] = run(center, a, next);
    out.emplace_back(rew + lp.gamma * best(end, next, depth - 1));
  }
  return out;
}

// Discounted cost of one edge, restated: integral of lambda * gamma^s ds over
// the edge length.
inline double gcp_reward(double c, const GcpParams& p) {
  if (p.gamma == 1.0) return -p.lambda_c * c;
  const double k = std::log(p.gamma);
  return p.lambda_c * (std::exp(k * c) - 1.0) / -k;
}

struct BestPath {
  double value = -std::numeric_limits<double>::infinity();
  int frontier = -1;
};

// Every simple path from `from` that ends at a frontier without passing one.
inline BestPath enumerate_paths(const GlobalIRM& g, const GcpParams& p, int from) {
  const auto adj = g.adjacency();
  BestPath best;
  std::vector<char> on(static_cast<std::size_t>(g.size()), 0);
  std::function<void(int, double, double)> go = [&](int u, double acc, double disc) {
    if (g.node(u).kind == NodeKind::Frontier) {
      const double v = acc + disc * p.mu_f * g.node(u).frontier_size;
      if (v > best.value) best = {v, u};
      return;
    }
    on[static_cast<std::size_t>(u)] = 1;
    for (auto [m, c] : adj[static_cast<std::size_t>(u)])
      if (!on[static_cast<std::size_t>(m)]) go(m, acc + disc * gcp_reward(c, p), disc * std::pow(p.gamma, c));
    on[static_cast<std::size_t>(u)] = 0;
  };
  go(from, 0.0, 1.0);
  return best;
}

/// Connected random graph: a breadcrumb tree plus extra edges, frontier
/// leaves hung on random breadcrumbs (one or two attachments each).
inline GlobalIRM random_graph(Rng& rng, int crumbs, int frontiers) {
  GlobalIRM g = GlobalIRM::start({0, 0});
  for (int i = 1; i < crumbs; ++i) {
    g.add_breadcrumb({i, 0}, i);
    g.add_edge(static_cast<int>(rng.below(static_cast<std::uint64_t>(i))), i, 0.5 + 5.0 * rng.uniform01());
  }
  for (int k = 0; k < crumbs / 3; ++k) {
    const int a = static_cast<int>(rng.below(static_cast<std::uint64_t>(crumbs)));
    const int b = static_cast<int>(rng.below(static_cast<std::uint64_t>(crumbs)));
    if (a != b) g.add_edge(a, b, 0.5 + 5.0 * rng.uniform01());
  }
  for (int k = 0; k < frontiers; ++k) {
    const int f = g.add_frontier({k, 1}, 1 + static_cast<int>(rng.below(20)));
    g.add_edge(static_cast<int>(rng.below(static_cast<std::uint64_t>(crumbs))), f, 0.5 + 5.0 * rng.uniform01());
    if (rng.bernoulli(0.3))
      g.add_edge(static_cast<int>(rng.below(static_cast<std::uint64_t>(crumbs))), f, 0.5 + 5.0 * rng.uniform01());
  }
  return g;
}

}  // namespace support
