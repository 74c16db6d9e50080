#include "plgrim/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace plgrim {

std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::LocalCoverage: return "local";
    case Mode::GlobalTransit: return "global";
    case Mode::Recovery: return "recovery";
    case Mode::Done: return "done";
  }
  return "?";
}

std::size_t common_prefix(std::span<const Cell> a, std::span<const Cell> b) {
  std::size_t n = 0;
  while (n < a.size() && n < b.size() && a[n] == b[n]) ++n;
  return n;
}

namespace {

struct Candidate {
  std::vector<Cell> cells;
  double value;
};

/// Highest-value candidate, except that candidates within eps_tie * |best|
/// of it compete on the prefix they share with the previous plan.
std::size_t pick_consistent(const std::vector<Candidate>& cands, const Plan* prev, double eps_tie) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < cands.size(); ++i)
    if (cands[i].value > cands[best].value) best = i;
  if (!prev || prev->cells.empty()) return best;
  const double tol = eps_tie * std::abs(cands[best].value);
  std::size_t chosen = best;
  std::size_t shared = common_prefix(cands[best].cells, prev->cells);
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (cands[best].value - cands[i].value >= tol && i != best) continue;
    const std::size_t s = common_prefix(cands[i].cells, prev->cells);
    if (s > shared || (s == shared && cands[i].value > cands[chosen].value)) {
      chosen = i;
      shared = s;
    }
  }
  return chosen;
}

Plan recovery_plan(const Belief& b) {
  Plan p;
  p.mode = Mode::Recovery;
  p.created_at = b.step();
  return p;
}

std::optional<Cell> nearest_uncovered(const Belief& b, int radius) {
  const Cell q = b.robot().cell;
  std::vector<Cell> targets;
  for (int y = q.y - radius; y <= q.y + radius; ++y)
    for (int x = q.x - radius; x <= q.x + radius; ++x) {
      const Cell c{x, y};
      if (b.known_free(c) && !b.covered(c)) targets.push_back(c);
    }
  if (targets.empty()) return std::nullopt;
  const Cell src[] = {q};
  const auto field = dijkstra(b, src);
  std::optional<Cell> best;
  for (Cell c : targets)
    if (field.reached(c) && (!best || field.at(c) < field.at(*best))) best = c;
  return best;
}

Plan local_coverage(const Belief& b, int theta, std::optional<Cell> target, const Plan* prev, const Params& params,
                    const PlanOptions& options) {
  const LocalIRM irm = rebuild_local_irm(b, params.irm.local_radius);
  const LocalModel model(b, irm, params.lcp, params.grid.r_sense, target);
  PomcpOptions po;
  po.budget = params.lcp.budget;
  po.seed = options.seed;
  po.trees = params.lcp.threads;
  po.exec = options.exec;
  const LocalPolicy policy = pomcp_plan(model, po);

  Plan plan;
  plan.mode = Mode::LocalCoverage;
  plan.theta = theta;
  plan.target = target;
  plan.created_at = b.step();

  std::vector<Candidate> cands;
  if (!policy.stay) {
    for (std::size_t i = 0; i < policy.root.size(); ++i) {
      std::vector<int> seq{policy.root[i].action};
      seq.insert(seq.end(), policy.continuation[i].begin(), policy.continuation[i].end());
      auto cells = committed_prefix(model, irm, seq);
      if (!cells.empty()) cands.push_back({std::move(cells), policy.root[i].q});
    }
  }
  if (!cands.empty()) {
    const auto& c = cands[pick_consistent(cands, prev, params.plgrim.eps_tie)];
    plan.cells = c.cells;
    plan.value = c.value;
    return plan;
  }

  // Nothing committable from the search: walk to the target or the nearest
  // uncovered cell instead.
  const std::optional<Cell> goal = target ? target : nearest_uncovered(b, params.irm.local_radius);
  if (!goal) return recovery_plan(b);
  const auto path = shortest_path(b, b.robot().cell, *goal);
  if (!path || path->cells.empty()) return recovery_plan(b);
  plan.cells = path->cells;
  plan.value = policy.root_value;
  return plan;
}

Plan global_transit(const Belief& b, const GlobalIRM& g, const GlobalPolicy& policy, const Plan* prev,
                    const Params& params) {
  const auto adj = g.adjacency();
  const int anchor = policy.anchor;
  std::vector<std::pair<int, double>> succ;
  double best = -std::numeric_limits<double>::infinity();
  for (auto [m, cost] : adj[static_cast<std::size_t>(anchor)]) {
    const double q = gcp_edge_reward(cost, params.gcp) +
                     std::pow(params.gcp.gamma, cost) * policy.value[static_cast<std::size_t>(m)];
    succ.emplace_back(m, q);
    best = std::max(best, q);
  }
  const double tol = params.plgrim.eps_tie * std::abs(best);

  std::vector<Candidate> cands;
  std::vector<int> frontier_of;
  const auto add = [&](int m, double q) {
    const FrontierGoal goal = follow_policy(policy, g, m);
    if (goal.frontier < 0) return;
    // The waypoint chain picks the frontier; the lattice route to it is the
    // believed shortest path, which is never longer than chaining the legs.
    auto path = shortest_path(b, b.robot().cell, g.node(goal.frontier).cell);
    if (!path || path->cells.empty()) return;
    cands.push_back({std::move(path->cells), q});
    frontier_of.push_back(goal.frontier);
  };
  // The greedy successor always competes; near-ties join it.
  add(policy.successor[static_cast<std::size_t>(anchor)], best);
  for (auto [m, q] : succ)
    if (m != policy.successor[static_cast<std::size_t>(anchor)] && best - q < tol) add(m, q);
  if (cands.empty()) return recovery_plan(b);

  const std::size_t i = pick_consistent(cands, prev, params.plgrim.eps_tie);
  Plan plan;
  plan.mode = Mode::GlobalTransit;
  plan.cells = std::move(cands[i].cells);
  plan.value = cands[i].value;
  plan.theta = frontier_of[i];
  plan.target = g.node(plan.theta).cell;
  plan.created_at = b.step();
  return plan;
}

}  // namespace

Plan plan_episode(const Belief& b, const GlobalIRM& g, const Plan* prev, const Params& params,
                  const PlanOptions& options) {
  const Cell q = b.robot().cell;
  const int radius = params.irm.local_radius;
  const int anchor = nearest_breadcrumb(g, b);
  const auto policy = solve_gcp(g, params.gcp, anchor, options.exec);

  if (!policy) {
    // Frontiers that exist but could not be reached are a planning failure.
    for (const auto& f : detect_frontiers(b, params.irm.min_frontier_size)) {
      const bool banned = std::any_of(f.cells.begin(), f.cells.end(), [&](Cell c) { return b.blacklisted(c); });
      if (!banned) return recovery_plan(b);
    }
    if (nearest_uncovered(b, radius)) return local_coverage(b, -1, std::nullopt, prev, params, options);
    bool uncovered = false;
    for (int y = q.y - radius; y <= q.y + radius && !uncovered; ++y)
      for (int x = q.x - radius; x <= q.x + radius && !uncovered; ++x)
        uncovered = b.known_free({x, y}) && !b.covered({x, y});
    if (uncovered) return recovery_plan(b);
    Plan done;
    done.mode = Mode::Done;
    done.created_at = b.step();
    return done;
  }

  const Cell theta = g.node(policy->target_frontier).cell;
  if (chebyshev(theta, q) <= radius)
    return local_coverage(b, policy->target_frontier, theta, prev, params, options);
  // A still-valid local plan is finished before switching to transit, so the
  // window edge does not make the two modes take turns.
  if (prev && prev->mode == Mode::LocalCoverage && !prev->cells.empty() && !check_path(b, q, prev->cells))
    return *prev;
  return global_transit(b, g, *policy, prev, params);
}

StepEvent execute_step(const GridMap& world, Belief& b, Plan& plan, const Params& params) {
  if (plan.mode == Mode::Done) throw std::logic_error("execute_step: plan is Done");
  if (plan.cells.empty()) return {};
  const Cell from = b.robot().cell;
  const Cell next = plan.cells.front();
  if (!adjacent8(from, next) || !b.known_free(next))
    throw std::logic_error("execute_step: plan head is not an adjacent known-Free cell");
  if (!world.is_free(next)) throw std::logic_error("execute_step: stepped onto an Occupied cell");

  b.set_robot(step(world, b.robot(), next));
  b.advance_step();
  b.integrate(sense(world, b.robot(), params.grid.r_sense));
  plan.cells.erase(plan.cells.begin());

  if (const auto bad = check_path(b, next, plan.cells)) return {StepEvent::Kind::PlanInvalidated, *bad};
  return {};
}

int resiliency_step(Belief& b, const Params& params) {
  const int stage = std::min(b.recovery_stage() + 1, 3);
  b.set_recovery_stage(stage);
  const Cell q = b.robot().cell;
  if (stage == 1) {
    const int r = params.irm.local_radius;
    for (int y = q.y - r; y <= q.y + r; ++y)
      for (int x = q.x - r; x <= q.x + r; ++x)
        if (b.in_bounds({x, y})) b.risk().reset({x, y});
    return stage;
  }
  b.risk() = raise_risk_threshold(b.risk(), params.plgrim.raise_factor);
  if (stage == 3) {
    const Cell src[] = {q};
    const auto field = dijkstra(b, src);
    const Frontier* nearest = nullptr;
    double best_cost = DistanceField::kInf;
    double best_euclid = DistanceField::kInf;
    const auto frontiers = detect_frontiers(b, params.irm.min_frontier_size);
    for (const auto& f : frontiers) {
      if (std::any_of(f.cells.begin(), f.cells.end(), [&](Cell c) { return b.blacklisted(c); })) continue;
      const double cost = field.at(f.centroid);
      const double euclid = euclid_cells(f.centroid, q);
      if (cost < best_cost || (cost == best_cost && euclid < best_euclid)) {
        nearest = &f;
        best_cost = cost;
        best_euclid = euclid;
      }
    }
    if (nearest) b.blacklist().push_back({nearest->cells, b.step() + params.plgrim.t_blacklist});
  }
  return stage;
}

}  // namespace plgrim
