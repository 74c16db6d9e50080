#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "plgrim/belief.hpp"
#include "plgrim/gcp.hpp"
#include "plgrim/irm.hpp"
#include "plgrim/lcp.hpp"
#include "plgrim/params.hpp"

namespace plgrim {

enum class Mode { LocalCoverage, GlobalTransit, Recovery, Done };

std::string_view mode_name(Mode m);

/// Executable prefix of a policy. `cells` excludes the robot cell.
struct Plan {
  Mode mode = Mode::Done;
  std::vector<Cell> cells;
  int theta = -1;                    // target frontier node id, -1 for none
  std::optional<Cell> target;        // that frontier's centroid
  int created_at = 0;
  double value = 0.0;
};

struct PlanOptions {
  std::uint64_t seed = 0;  // seeds the POMCP particle and rollout streams
  Exec exec = Exec::Serial;
};

/// One hierarchical planning episode: GCP picks the target frontier, LCP
/// covers the window around it or the plan transits along breadcrumbs.
/// A Recovery plan (empty cells) reports that no committed-safe plan exists.
Plan plan_episode(const Belief& b, const GlobalIRM& g, const Plan* prev, const Params& params,
                  const PlanOptions& options = {});

struct StepEvent {
  enum class Kind { Ok, PlanInvalidated };
  Kind kind = Kind::Ok;
  std::size_t index = 0;  // first invalid edge of the remainder
};

/// Takes the plan head, senses from the new cell and integrates. Throws
/// std::logic_error when the head is not an adjacent known-Free cell or the
/// world disagrees.
StepEvent execute_step(const GridMap& world, Belief& b, Plan& plan, const Params& params);

/// Escalating recovery; returns the stage applied (1..3).
///   1: window risk back to the prior
///   2: CVaR threshold raised
///   3: raised again and the nearest frontier blacklisted
int resiliency_step(Belief& b, const Params& params);

/// Length of the common prefix of two cell sequences.
std::size_t common_prefix(std::span<const Cell> a, std::span<const Cell> b);

}  // namespace plgrim
