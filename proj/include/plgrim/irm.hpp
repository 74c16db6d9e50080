#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "plgrim/belief.hpp"
#include "plgrim/params.hpp"

namespace plgrim {

/// 8-connected cluster of known-Free cells that border Unknown space.
struct Frontier {
  std::vector<Cell> cells;  // sorted
  Cell centroid;            // member cell nearest the mean position
  int size() const { return static_cast<int>(cells.size()); }
};

/// Clusters smaller than `min_size` are dropped. Sorted by size descending,
/// then centroid ascending.
std::vector<Frontier> detect_frontiers(const Belief& b, int min_size);

/// Dense rolling-window lattice around the robot.
class LocalIRM {
 public:
  struct NodeAttr {
    bool covered;
    double cvar;
    double confidence;
  };
  struct Edge {
    int a;
    int b;
    double cost;
  };

  LocalIRM() = default;
  LocalIRM(Cell center, int radius);

  Cell center() const { return center_; }
  int radius() const { return radius_; }
  bool in_window(Cell c) const { return chebyshev(c, center_) <= radius_; }

  std::span<const Cell> nodes() const { return nodes_; }
  std::span<const NodeAttr> attrs() const { return attrs_; }
  std::span<const Edge> edges() const { return edges_; }

  /// Node id of c, or -1.
  int node_id(Cell c) const;
  bool contains(Cell c) const { return node_id(c) >= 0; }
  /// Cost of the lattice edge a-b if the IRM holds it.
  std::optional<double> edge(Cell a, Cell b) const;

  int add_node(Cell c, NodeAttr attr);
  void add_edge(int a, int b, double cost);

 private:
  int side() const { return 2 * radius_ + 1; }

  Cell center_;
  int radius_ = 0;
  std::vector<Cell> nodes_;
  std::vector<NodeAttr> attrs_;
  std::vector<Edge> edges_;
  std::vector<int> node_at_;  // window-local index -> node id
  std::vector<std::array<int, 8>> edge_at_;  // node id x direction -> edge id
};

/// Nodes are the known-Free, CVaR-traversable window cells plus the robot
/// cell; Untraversable edges are omitted.
LocalIRM rebuild_local_irm(const Belief& b, int radius);

enum class NodeKind { Breadcrumb, Frontier };

struct GlobalNode {
  Cell cell;
  NodeKind kind = NodeKind::Breadcrumb;
  int visit_step = 0;              // breadcrumbs
  int frontier_size = 0;           // frontiers
  std::vector<Cell> members;       // frontiers
};

struct GlobalEdge {
  int a;
  int b;
  double cost;
};

/// Sparse breadcrumb graph with frontier leaves. Breadcrumbs occupy ids
/// [0, breadcrumb_count()); frontier nodes follow.
class GlobalIRM {
 public:
  GlobalIRM() = default;

  /// Mission start: a single breadcrumb.
  static GlobalIRM start(Cell cell, double distance_traveled = 0.0, int step = 0);

  int add_breadcrumb(Cell cell, int visit_step);
  int add_frontier(Cell cell, int size, std::vector<Cell> members = {});
  void add_edge(int a, int b, double cost);
  /// Drops every frontier node and its edges.
  void clear_frontiers();

  std::span<const GlobalNode> nodes() const { return nodes_; }
  std::span<const GlobalEdge> edges() const { return edges_; }
  const GlobalNode& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  int size() const { return static_cast<int>(nodes_.size()); }
  int breadcrumb_count() const { return breadcrumbs_; }
  std::vector<int> frontier_ids() const;

  /// Neighbor lists (other id, cost) in edge insertion order.
  std::vector<std::vector<std::pair<int, double>>> adjacency() const;

  double last_breadcrumb_distance() const { return last_bc_distance_; }
  void set_last_breadcrumb_distance(double d) { last_bc_distance_ = d; }

  /// Plain-text dump: `node <id> <kind> <x> <y> <attr>` and `edge <a> <b> <cost>`.
  std::string dump() const;

 private:
  std::vector<GlobalNode> nodes_;
  std::vector<GlobalEdge> edges_;
  int breadcrumbs_ = 0;
  double last_bc_distance_ = 0.0;
};

/// Drops a breadcrumb after d_bc of travel (never on a cell that already
/// holds one) and replaces the frontier layer with `frontiers`, each attached
/// to its nearest breadcrumb by believed path cost. Unreachable or
/// blacklisted frontiers are left out.
GlobalIRM update_global_irm(GlobalIRM g, const Belief& b, const std::vector<Frontier>& frontiers,
                            const IrmParams& params);

/// Breadcrumb with the lowest believed path cost from the robot, falling back
/// to the Euclidean nearest when none is reachable.
int nearest_breadcrumb(const GlobalIRM& g, const Belief& b);

/// Index of the first edge of `cells` (starting at `from`) that is no longer
/// committed-safe; nullopt when the whole path is valid.
std::optional<std::size_t> check_path(const Belief& b, Cell from, std::span<const Cell> cells);

}  // namespace plgrim
