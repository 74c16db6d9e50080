#include "plgrim/gcp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace plgrim {
namespace {

/// Compressed adjacency with precomputed reward and discount per arc.
struct Arcs {
  std::vector<int> offset;
  std::vector<int> target;
  std::vector<double> reward;
  std::vector<double> discount;
};

Arcs build_arcs(const GlobalIRM& g, const GcpParams& p) {
  const auto adj = g.adjacency();
  Arcs a;
  a.offset.push_back(0);
  for (const auto& list : adj) {
    for (auto [m, cost] : list) {
      a.target.push_back(m);
      a.reward.push_back(gcp_edge_reward(cost, p));
      a.discount.push_back(std::pow(p.gamma, cost));
    }
    a.offset.push_back(static_cast<int>(a.target.size()));
  }
  return a;
}

double backup(const Arcs& a, const std::vector<double>& v, int n) {
  double best = -std::numeric_limits<double>::infinity();
  for (int k = a.offset[n]; k < a.offset[n + 1]; ++k)
    best = std::max(best, a.reward[k] + a.discount[k] * v[static_cast<std::size_t>(a.target[k])]);
  return best;
}

/// One Jacobi sweep; returns max |delta|. Only `active` nodes are backed up,
/// so the serial and OpenMP variants produce identical values.
double sweep_serial(const Arcs& a, const std::vector<int>& active, const std::vector<double>& v,
                    std::vector<double>& next) {
  double delta = 0.0;
  for (int n : active) {
    next[static_cast<std::size_t>(n)] = backup(a, v, n);
    delta = std::max(delta, std::abs(next[static_cast<std::size_t>(n)] - v[static_cast<std::size_t>(n)]));
  }
  return delta;
}

double sweep_parallel(const Arcs& a, const std::vector<int>& active, const std::vector<double>& v,
                      std::vector<double>& next) {
  double delta = 0.0;
  const auto count = static_cast<long>(active.size());
#pragma omp parallel for reduction(max : delta) schedule(static)
  for (long i = 0; i < count; ++i) {
    const int n = active[static_cast<std::size_t>(i)];
    next[static_cast<std::size_t>(n)] = backup(a, v, n);
    delta = std::max(delta, std::abs(next[static_cast<std::size_t>(n)] - v[static_cast<std::size_t>(n)]));
  }
  return delta;
}

}  // namespace

double gcp_edge_reward(double cost, const GcpParams& p) {
  if (p.gamma >= 1.0) return -p.lambda_c * cost;
  return -p.lambda_c * (1.0 - std::pow(p.gamma, cost)) / std::log(1.0 / p.gamma);
}

std::optional<GlobalPolicy> solve_gcp(const GlobalIRM& g, const GcpParams& p, int anchor, Exec exec) {
  const int n = g.size();
  if (anchor < 0 || anchor >= n) throw std::out_of_range("solve_gcp: anchor not in graph");
  const auto frontiers = g.frontier_ids();
  if (frontiers.empty()) return std::nullopt;

  const auto adj = g.adjacency();
  const auto idx = [](int i) { return static_cast<std::size_t>(i); };

  // Hop distance to the nearest frontier; nodes that never reach one are
  // left out of the backup and keep no successor.
  std::vector<int> hops(idx(n), -1);
  std::deque<int> queue;
  for (int f : frontiers) {
    hops[idx(f)] = 0;
    queue.push_back(f);
  }
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    // Frontiers absorb, so paths never continue through them.
    if (hops[idx(u)] > 0 || g.node(u).kind == NodeKind::Frontier) {
      for (auto [m, c] : adj[idx(u)]) {
        if (hops[idx(m)] >= 0 || g.node(m).kind == NodeKind::Frontier) continue;
        hops[idx(m)] = hops[idx(u)] + 1;
        queue.push_back(m);
      }
    }
  }
  if (hops[idx(anchor)] < 0) return std::nullopt;

  GlobalPolicy policy;
  policy.anchor = anchor;
  policy.value.assign(idx(n), 0.0);
  policy.successor.assign(idx(n), -1);
  std::vector<int> active;
  for (int i = 0; i < n; ++i) {
    if (g.node(i).kind == NodeKind::Frontier)
      policy.value[idx(i)] = p.mu_f * g.node(i).frontier_size;
    else if (hops[idx(i)] > 0)
      active.push_back(i);
  }

  const Arcs arcs = build_arcs(g, p);
  std::vector<double> next = policy.value;
  for (policy.sweeps = 0; policy.sweeps < p.max_sweeps;) {
    const double delta = exec == Exec::Parallel ? sweep_parallel(arcs, active, policy.value, next)
                                                : sweep_serial(arcs, active, policy.value, next);
    ++policy.sweeps;
    policy.value.swap(next);
    if (delta < p.eps_vi) break;
  }
  if (policy.sweeps >= p.max_sweeps) throw std::runtime_error("solve_gcp: value iteration did not converge");

  for (int u : active) {
    double best = -std::numeric_limits<double>::infinity();
    int best_m = -1;
    for (int k = arcs.offset[idx(u)]; k < arcs.offset[idx(u) + 1]; ++k) {
      const int m = arcs.target[idx(k)];
      if (hops[idx(m)] < 0) continue;
      const double q = arcs.reward[idx(k)] + arcs.discount[idx(k)] * policy.value[idx(m)];
      const double tol = 1e-9 * std::max(1.0, std::abs(q));
      const bool better = best_m < 0 || q > best + tol ||
                          (q >= best - tol && (hops[idx(m)] < hops[idx(best_m)] ||
                                               (hops[idx(m)] == hops[idx(best_m)] && m < best_m)));
      if (better) {
        best = std::max(best, q);
        best_m = m;
      }
    }
    policy.successor[idx(u)] = best_m;
  }
  policy.target_frontier = follow_policy(policy, g, anchor).frontier;
  if (policy.target_frontier < 0) return std::nullopt;
  return policy;
}

FrontierGoal follow_policy(const GlobalPolicy& policy, const GlobalIRM& g, int from) {
  FrontierGoal goal;
  int cur = from;
  goal.nodes.push_back(cur);
  for (int steps = 0; g.node(cur).kind != NodeKind::Frontier; ++steps) {
    if (steps > g.size()) throw std::logic_error("GCP successor map contains a cycle");
    cur = policy.successor[static_cast<std::size_t>(cur)];
    if (cur < 0) return FrontierGoal{-1, goal.nodes};
    goal.nodes.push_back(cur);
  }
  goal.frontier = cur;
  return goal;
}

FrontierGoal frontier_goal(const GlobalPolicy& policy, const GlobalIRM& g) {
  return follow_policy(policy, g, policy.anchor);
}

}  // namespace plgrim
