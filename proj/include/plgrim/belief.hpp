#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "plgrim/grid_map.hpp"
#include "plgrim/params.hpp"
#include "plgrim/risk.hpp"

namespace plgrim {

enum class Knowledge : std::uint8_t { Unknown, Free, Occupied };

class BeliefError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A frontier region excluded from targeting until a given step.
struct BlacklistEntry {
  std::vector<Cell> cells;
  int until_step = 0;
};

/// The agent's map: known occupancy, coverage, fused risk and robot pose.
class Belief {
 public:
  Belief() = default;
  Belief(int width, int height, double cell_size, const RiskParams& risk, RobotState robot);

  int width() const { return width_; }
  int height() const { return height_; }
  double cell_size() const { return cell_size_; }
  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * width_ + c.x; }

  /// Out-of-bounds cells read as Occupied.
  Knowledge known(Cell c) const { return in_bounds(c) ? known_[index(c)] : Knowledge::Occupied; }
  bool known_free(Cell c) const { return known(c) == Knowledge::Free; }
  bool covered(Cell c) const { return in_bounds(c) && covered_[index(c)] != 0; }
  std::size_t covered_count() const { return covered_count_; }
  /// Whether an observation has been integrated from c. The world is static,
  /// so sensing there again reveals nothing.
  bool viewed_from(Cell c) const { return in_bounds(c) && viewed_[index(c)] != 0; }

  const RiskMap& risk() const { return risk_; }
  RiskMap& risk() { return risk_; }

  const RobotState& robot() const { return robot_; }
  void set_robot(const RobotState& q) { robot_ = q; }

  int step() const { return step_; }
  void advance_step() { ++step_; }

  /// Records z; returns the information gain in bits (one per newly covered
  /// cell). Throws BeliefError when z was not taken at the robot cell.
  double integrate(const Observation& z);

  /// Free-form edits for fixtures; these bypass integrate() bookkeeping
  /// except the covered count.
  void set_known(Cell c, Knowledge k);
  void set_covered(Cell c, bool covered);

  /// Whether the edge a->b may be committed: both ends known Free, a
  /// diagonal clear of known-Occupied corner cells (the supercover rule), and
  /// the CVaR threshold respected. Returns the risk-weighted cost.
  std::optional<double> edge_cost(Cell a, Cell b) const;

  std::vector<BlacklistEntry>& blacklist() { return blacklist_; }
  const std::vector<BlacklistEntry>& blacklist() const { return blacklist_; }
  bool blacklisted(Cell c) const;

  int recovery_stage() const { return recovery_stage_; }
  void set_recovery_stage(int s) { recovery_stage_ = s; }

 private:
  int width_ = 0;
  int height_ = 0;
  double cell_size_ = 0.5;
  std::vector<Knowledge> known_;
  std::vector<std::uint8_t> covered_;
  std::vector<std::uint8_t> viewed_;
  std::size_t covered_count_ = 0;
  RiskMap risk_;
  RobotState robot_;
  int step_ = 0;
  std::vector<BlacklistEntry> blacklist_;
  int recovery_stage_ = 0;
};

/// Functional form of Belief::integrate.
std::pair<Belief, double> integrate(Belief b, const Observation& z);

/// Covered Free cells over ground-truth Free cells.
double coverage_fraction(const Belief& b, const GridMap& truth);

/// Lattice path; `cells` excludes the start cell.
struct Path {
  std::vector<Cell> cells;
  double cost = 0.0;
};

/// Single- or multi-source Dijkstra over committed-safe edges. Ties on cost
/// are broken by hop count.
struct DistanceField {
  static constexpr double kInf = std::numeric_limits<double>::infinity();
  int width = 0;
  std::vector<double> cost;
  std::vector<int> hops;
  std::vector<int> source;  // index into the source list, -1 when unreached

  double at(Cell c) const { return cost[static_cast<std::size_t>(c.y) * width + c.x]; }
  int hops_at(Cell c) const { return hops[static_cast<std::size_t>(c.y) * width + c.x]; }
  int source_at(Cell c) const { return source[static_cast<std::size_t>(c.y) * width + c.x]; }
  bool reached(Cell c) const { return at(c) < kInf; }
};

/// Stops once every settled cell costs more than `max_cost`, or once `stop_at`
/// is settled.
DistanceField dijkstra(const Belief& b, std::span<const Cell> sources,
                       double max_cost = DistanceField::kInf,
                       std::optional<Cell> stop_at = std::nullopt);

/// Minimal-cost committed-safe path. Ties are broken by (cost, hop count,
/// first diverging direction in N,E,S,W,NE,SE,SW,NW order).
std::optional<Path> shortest_path(const Belief& b, Cell from, Cell to);

}  // namespace plgrim
