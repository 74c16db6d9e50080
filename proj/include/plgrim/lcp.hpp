#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "plgrim/belief.hpp"
#include "plgrim/grid_map.hpp"
#include "plgrim/irm.hpp"
#include "plgrim/params.hpp"
#include "plgrim/rng.hpp"

namespace plgrim {

/// Fixed-length sequence of unit lattice moves.
struct MacroAction {
  std::vector<Cell> moves;
};

/// The 8 straight headings followed by the 8 single-turn L shapes (axis
/// heading for half the length, then a left or right turn).
std::vector<MacroAction> macro_candidates(int length);

/// Sampled completion of the belief over the particle extent: Unknown cells
/// drawn Occupied with probability p_occ, known cells copied.
struct Particle {
  Cell origin;  // world cell of local (0, 0)
  int side = 0;
  std::vector<std::uint8_t> occupied;
  std::vector<std::uint8_t> covered;

  bool contains(Cell c) const {
    const Cell l = c - origin;
    return l.x >= 0 && l.y >= 0 && l.x < side && l.y < side;
  }
  std::size_t local(Cell c) const {
    const Cell l = c - origin;
    return static_cast<std::size_t>(l.y) * side + l.x;
  }
  /// Cells outside the extent read as Occupied.
  bool is_occupied(Cell c) const { return !contains(c) || occupied[local(c)] != 0; }
  bool is_covered(Cell c) const { return contains(c) && covered[local(c)] != 0; }
};

/// Generative model for one local planning episode. Holds the static parts
/// (window, per-cell risk class, sensor table) shared by every simulation.
class LocalModel {
 public:
  struct Outcome {
    double reward = 0.0;
    Cell end;
    int steps = 0;          // moves actually taken
    int newly_covered = 0;
    double cost = 0.0;      // risk-weighted length, m
  };

  LocalModel(const Belief& b, const LocalIRM& irm, const LcpParams& params, double r_sense,
             std::optional<Cell> theta);

  const LcpParams& params() const { return params_; }
  Cell center() const { return center_; }
  int radius() const { return radius_; }
  std::optional<Cell> theta() const { return theta_; }
  std::span<const MacroAction> actions() const { return actions_; }

  /// Extent = window grown by the sensor radius.
  Particle sample_particle(Rng& rng) const;

  /// Whether a single move u->v is possible in `particle`.
  bool can_move(const Particle& particle, Cell u, Cell v) const;
  /// Risk-weighted length of u->v; Unknown endpoints are charged CVaR r_max.
  double move_cost(Cell u, Cell v) const;

  /// Executes `a` from q, truncating at the first blocked move; marks
  /// simulated sensing as covered in `particle`.
  Outcome apply(Particle& particle, Cell q, const MacroAction& a) const;

  /// Shaping term for ending a macro action at `c` (0 without theta).
  double shaping(Cell c) const;

  /// Window cells that can still yield information (Unknown or uncovered).
  int reward_bound_cells() const;

 private:
  int sense_into(Particle& particle, Cell q) const;

  LcpParams params_;
  Cell center_;
  int radius_;
  double cell_size_;
  double r_max_;
  double lambda_risk_;
  std::optional<Cell> theta_;
  std::vector<MacroAction> actions_;
  std::shared_ptr<const VisibilityTable> table_;
  struct FlatRay {
    std::int32_t target;  // index offset from the sensor cell
    std::uint32_t first;  // into between_
    std::uint32_t count;
  };

  Particle particle_template_;        // known occupancy, Unknown as Free
  std::vector<double> cvar_;          // per extent cell; r_max for Unknown
  std::vector<std::uint8_t> blocked_; // known Occupied or CVaR above r_max
  std::vector<std::uint8_t> viewed_;  // already sensed from in the real run
  std::vector<std::uint32_t> unknown_;  // extent indices of Unknown cells
  std::vector<FlatRay> rays_;
  std::vector<std::int32_t> between_;
};

/// Particle sampled over the local window of `b` (see LocalModel).
Particle sample_particle(const Belief& b, int radius, double r_sense, double p_occ, Rng& rng);

/// Reward of one macro action in a sampled particle.
double rollout_reward(const LocalModel& model, Particle& particle, Cell q, const MacroAction& a);

struct RootStat {
  int action = -1;
  int visits = 0;
  double q = 0.0;
};

struct LocalPolicy {
  std::vector<int> actions;           // greedy macro-action indices, root first
  double root_value = 0.0;
  std::vector<double> reward_trace;   // mean immediate reward per greedy step
  std::vector<RootStat> root;         // merged root statistics, best Q first
  bool stay = false;
  int simulations = 0;
  /// Greedy continuation below each entry of `root`.
  std::vector<std::vector<int>> continuation;
};

struct PomcpOptions {
  int budget = 2048;
  std::uint64_t seed = 0;
  int trees = 1;   // root-parallel trees, merged in index order
  Exec exec = Exec::Serial;
};

/// UCB1 Monte-Carlo tree search over macro-action sequences with particle
/// sampling of unknown cells. Deterministic for fixed options, independent of
/// `exec`.
LocalPolicy pomcp_plan(const LocalModel& model, const PomcpOptions& options);

/// Exhaustive finite-horizon search on a model whose extent holds no Unknown
/// cell. Returns the optimal discounted value of each first action (nullopt
/// for illegal ones).
std::vector<std::optional<double>> exhaustive_action_values(const LocalModel& model, int depth);

/// Cells of a macro-action sequence that can be committed: stops at the first
/// move not backed by a Local IRM edge.
std::vector<Cell> committed_prefix(const LocalModel& model, const LocalIRM& irm,
                                   std::span<const int> actions);

}  // namespace plgrim
