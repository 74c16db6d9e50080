#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "plgrim/belief.hpp"
#include "plgrim/grid_map.hpp"
#include "plgrim/params.hpp"
#include "plgrim/planner.hpp"

namespace plgrim {

enum class PlannerId { Plgrim, Nbv, Hfe };

std::string_view planner_name(PlannerId id);
std::optional<PlannerId> parse_planner(std::string_view name);
/// "plgrim, nbv, hfe"
std::string planner_names();

/// Where an episode's world comes from. Generated maps draw their seed from
/// the episode seed's "map" substream unless `map_seed` pins it.
struct MapSource {
  enum class Kind { File, Maze, Subway };
  Kind kind = Kind::File;
  std::string path;
  int width = 0;
  int height = 0;
  double hazard_density = 0.0;
  int scale = 1;
  std::optional<std::uint64_t> map_seed;

  friend bool operator==(const MapSource&, const MapSource&) = default;
};

/// Parses `maze:WxH[:dD]` or `subway:S`. Throws std::invalid_argument.
MapSource parse_map_gen(std::string_view spec);

GridMap generate_subway(int scale, std::uint64_t seed, double cell_size = 0.5);
/// Throws std::invalid_argument for even or too small dimensions.
GridMap generate_maze(int width, int height, std::uint64_t seed, double hazard_density, double cell_size = 0.5);

GridMap load_source(const MapSource& src, std::uint64_t episode_seed, double cell_size);

/// Row-major first Free cell when the map marks no start.
Cell start_cell(const GridMap& map);

/// Whether every Free cell is 8-reachable from the first one.
bool free_space_connected(const GridMap& map);

struct EpisodeConfig {
  MapSource map;
  PlannerId planner = PlannerId::Plgrim;
  std::uint64_t seed = 0;
  int max_steps = 5000;
  Params params;
  Exec exec = Exec::Serial;  // kernel execution inside the episode
};

struct MetricsRow {
  int step = 0;
  double time_s = 0.0;
  double coverage = 0.0;
  double distance_m = 0.0;
  Mode mode = Mode::Done;
  int replans = 0;
  int recoveries = 0;
};

struct Metrics {
  std::vector<MetricsRow> rows;
  double final_coverage = 0.0;
  int steps_to_90 = -1;  // first step at coverage >= 0.9, -1 when never
  double total_distance = 0.0;
  bool done = false;
  int no_progress = 0;  // NBV replans that fell back to nearest-frontier transit
  std::string end_reason;  // "done", "max_steps", "stuck" or "error: ..."
};

/// Observation points for safety auditing.
struct EpisodeHooks {
  /// A plan with cells was just adopted.
  std::function<void(const Belief&, const Plan&)> on_commit;
  /// About to move from the belief's robot cell to `next`.
  std::function<void(const GridMap&, const Belief&, Cell next)> on_step;
};

/// Receding-horizon loop until Done, max_steps or a stall. Planner errors end
/// the episode with the metrics gathered so far.
Metrics run_episode(const EpisodeConfig& cfg, const EpisodeHooks& hooks = {});

std::string metrics_csv(const Metrics& m);

struct ComparisonRow {
  double time_s = 0.0;
  PlannerId planner = PlannerId::Plgrim;
  double mean_coverage = 0.0;
  double median_coverage = 0.0;
  int n_runs = 0;
};

/// Coverage of an episode at time t: last row at or before t.
double coverage_at(const Metrics& m, double t);

/// Runs every (cfg, seed) pair and aggregates coverage-vs-time per planner on
/// a grid of step harness.time_step. Throws std::invalid_argument when the
/// configs disagree on the map. Parallel mode gives identical output.
std::vector<ComparisonRow> compare(const std::vector<EpisodeConfig>& cfgs, const std::vector<std::uint64_t>& seeds,
                                   Exec exec = Exec::Serial);

/// Same, reusing episodes already run: runs[i][j] is cfgs[i] under seeds[j].
std::vector<ComparisonRow> aggregate(const std::vector<EpisodeConfig>& cfgs,
                                     const std::vector<std::vector<Metrics>>& runs);

std::string comparison_csv(const std::vector<ComparisonRow>& rows);

}  // namespace plgrim
