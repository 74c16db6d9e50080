#pragma once

#include <optional>
#include <vector>

#include "plgrim/belief.hpp"
#include "plgrim/irm.hpp"
#include "plgrim/params.hpp"
#include "plgrim/planner.hpp"
#include "plgrim/rng.hpp"

namespace plgrim {

struct ViewCandidate {
  Cell cell;
  Path path;
  double utility = 0.0;
};

/// Uncovered cells (Unknown or uncovered Free) a sensor at `view` would see
/// if only known-Occupied cells blocked the line of sight.
int predicted_coverage(const Belief& b, Cell view, double r_sense);

/// NBV utility of a view reached by a path of `path_cost`.
double view_utility(const Belief& b, Cell view, double path_cost, const Params& params);

struct NbvResult {
  Plan plan;
  bool no_progress = false;
  std::vector<ViewCandidate> candidates;  // every evaluated, reachable view
};

/// Samples views uniformly from the known-Free cells within r_view (robot cell
/// excluded) and heads for the best one. With no positive utility it falls
/// back to the nearest frontier in range, and reports NoProgress without one.
NbvResult nbv_plan(const Belief& b, const Params& params, Rng& sampling);

/// Local-first frontier selection: the path-cost nearest frontier with its
/// centroid within r_local, otherwise the nearest frontier of `g`. Done when
/// none is reachable.
Plan hfe_plan(const Belief& b, const GlobalIRM& g, const Params& params);

/// Shortest believed path to the nearest member cell over `frontiers`.
std::optional<Path> path_to_nearest_frontier(const Belief& b, const std::vector<std::vector<Cell>>& frontiers,
                                             int* chosen = nullptr);

}  // namespace plgrim
