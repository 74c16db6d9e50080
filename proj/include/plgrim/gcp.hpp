#pragma once

#include <optional>
#include <vector>

#include "plgrim/irm.hpp"
#include "plgrim/params.hpp"

namespace plgrim {

/// Greedy policy over the Global IRM. Frontier nodes are absorbing with value
/// mu_f * size; every other node backs up
///   V(n) = max_m [ edge_reward(cost(n,m)) + gamma^cost(n,m) * V(m) ].
struct GlobalPolicy {
  std::vector<int> successor;  // -1 at frontiers and at nodes that reach none
  std::vector<double> value;
  int anchor = 0;
  int target_frontier = -1;
  int sweeps = 0;
};

/// Per-meter cost lambda_c integrated under the per-meter discount gamma, so
/// a move of length c costs lambda_c * (1 - gamma^c) / ln(1/gamma)
/// (lambda_c * c when gamma == 1).
double gcp_edge_reward(double cost, const GcpParams& p);

/// nullopt when no frontier is reachable from `anchor`.
std::optional<GlobalPolicy> solve_gcp(const GlobalIRM& g, const GcpParams& p, int anchor,
                                      Exec exec = Exec::Serial);

struct FrontierGoal {
  int frontier = -1;
  std::vector<int> nodes;  // anchor ... frontier
};

/// Follows successors from the anchor. Throws std::logic_error on a cycle.
FrontierGoal frontier_goal(const GlobalPolicy& policy, const GlobalIRM& g);

/// Follows successors from an arbitrary node.
FrontierGoal follow_policy(const GlobalPolicy& policy, const GlobalIRM& g, int from);

}  // namespace plgrim
