#include "plgrim/irm.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace plgrim {

// ---------------------------------------------------------------------------
// Frontiers

namespace {

bool borders_unknown(const Belief& b, Cell c) {
  for (Cell d : kNeighbors4) {
    const Cell m = c + d;
    if (b.in_bounds(m) && b.known(m) == Knowledge::Unknown) return true;
  }
  return false;
}

}  // namespace

std::vector<Frontier> detect_frontiers(const Belief& b, int min_size) {
  const auto n = static_cast<std::size_t>(b.width()) * b.height();
  std::vector<std::uint8_t> is_frontier(n, 0), seen(n, 0);
  for (int y = 0; y < b.height(); ++y)
    for (int x = 0; x < b.width(); ++x) {
      const Cell c{x, y};
      if (b.known_free(c) && borders_unknown(b, c)) is_frontier[b.index(c)] = 1;
    }

  std::vector<Frontier> out;
  std::deque<Cell> queue;
  for (int y = 0; y < b.height(); ++y)
    for (int x = 0; x < b.width(); ++x) {
      const Cell seed{x, y};
      if (!is_frontier[b.index(seed)] || seen[b.index(seed)]) continue;
      Frontier f;
      seen[b.index(seed)] = 1;
      queue.push_back(seed);
      while (!queue.empty()) {
        const Cell c = queue.front();
        queue.pop_front();
        f.cells.push_back(c);
        for (Cell d : kNeighbors8) {
          const Cell m = c + d;
          if (!b.in_bounds(m)) continue;
          const auto j = b.index(m);
          if (is_frontier[j] && !seen[j]) {
            seen[j] = 1;
            queue.push_back(m);
          }
        }
      }
      if (f.size() < min_size) continue;
      std::sort(f.cells.begin(), f.cells.end());
      double mx = 0.0, my = 0.0;
      for (Cell c : f.cells) {
        mx += c.x;
        my += c.y;
      }
      mx /= f.size();
      my /= f.size();
      double best = std::numeric_limits<double>::infinity();
      for (Cell c : f.cells) {
        const double d2 = (c.x - mx) * (c.x - mx) + (c.y - my) * (c.y - my);
        if (d2 < best - 1e-12) {
          best = d2;
          f.centroid = c;
        }
      }
      out.push_back(std::move(f));
    }
  std::sort(out.begin(), out.end(), [](const Frontier& l, const Frontier& r) {
    if (l.size() != r.size()) return l.size() > r.size();
    return l.centroid < r.centroid;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Local IRM

LocalIRM::LocalIRM(Cell center, int radius)
    : center_(center),
      radius_(radius),
      node_at_(static_cast<std::size_t>(2 * radius + 1) * (2 * radius + 1), -1) {
  if (radius < 1) throw std::invalid_argument("LocalIRM: radius must be >= 1");
}

int LocalIRM::node_id(Cell c) const {
  if (!in_window(c)) return -1;
  const Cell l = c - center_ + Cell{radius_, radius_};
  return node_at_[static_cast<std::size_t>(l.y) * side() + l.x];
}

int LocalIRM::add_node(Cell c, NodeAttr attr) {
  const Cell l = c - center_ + Cell{radius_, radius_};
  const int id = static_cast<int>(nodes_.size());
  node_at_[static_cast<std::size_t>(l.y) * side() + l.x] = id;
  nodes_.push_back(c);
  attrs_.push_back(attr);
  edge_at_.push_back({-1, -1, -1, -1, -1, -1, -1, -1});
  return id;
}

void LocalIRM::add_edge(int a, int b, double cost) {
  const int id = static_cast<int>(edges_.size());
  edges_.push_back({a, b, cost});
  const Cell ca = nodes_[static_cast<std::size_t>(a)];
  const Cell cb = nodes_[static_cast<std::size_t>(b)];
  for (std::size_t k = 0; k < kNeighbors8.size(); ++k) {
    if (ca + kNeighbors8[k] == cb) edge_at_[static_cast<std::size_t>(a)][k] = id;
    if (cb + kNeighbors8[k] == ca) edge_at_[static_cast<std::size_t>(b)][k] = id;
  }
}

std::optional<double> LocalIRM::edge(Cell a, Cell b) const {
  const int ia = node_id(a);
  if (ia < 0 || !adjacent8(a, b)) return std::nullopt;
  for (std::size_t k = 0; k < kNeighbors8.size(); ++k) {
    if (a + kNeighbors8[k] != b) continue;
    const int e = edge_at_[static_cast<std::size_t>(ia)][k];
    if (e < 0) return std::nullopt;
    return edges_[static_cast<std::size_t>(e)].cost;
  }
  return std::nullopt;
}

LocalIRM rebuild_local_irm(const Belief& b, int radius) {
  const Cell center = b.robot().cell;
  LocalIRM irm(center, radius);
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx) {
      const Cell c = center + Cell{dx, dy};
      if (!b.known_free(c)) continue;
      if (c != center && !b.risk().traversable(c)) continue;
      const auto& est = b.risk().at(c);
      irm.add_node(c, {b.covered(c), b.risk().cvar(c), est.confidence});
    }
  // Only the forward half of the neighborhood, so each undirected edge once.
  static constexpr Cell kForward[] = {{1, 0}, {0, 1}, {1, 1}, {-1, 1}};
  for (std::size_t i = 0; i < irm.nodes().size(); ++i) {
    const Cell c = irm.nodes()[i];
    for (Cell d : kForward) {
      const int j = irm.node_id(c + d);
      if (j < 0) continue;
      if (const auto w = b.edge_cost(c, c + d)) irm.add_edge(static_cast<int>(i), j, *w);
    }
  }
  return irm;
}

// ---------------------------------------------------------------------------
// Global IRM

GlobalIRM GlobalIRM::start(Cell cell, double distance_traveled, int step) {
  GlobalIRM g;
  g.add_breadcrumb(cell, step);
  g.last_bc_distance_ = distance_traveled;
  return g;
}

int GlobalIRM::add_breadcrumb(Cell cell, int visit_step) {
  if (static_cast<int>(nodes_.size()) != breadcrumbs_)
    throw std::logic_error("GlobalIRM: clear frontiers before adding breadcrumbs");
  nodes_.push_back({cell, NodeKind::Breadcrumb, visit_step, 0, {}});
  return breadcrumbs_++;
}

int GlobalIRM::add_frontier(Cell cell, int size, std::vector<Cell> members) {
  nodes_.push_back({cell, NodeKind::Frontier, 0, size, std::move(members)});
  return static_cast<int>(nodes_.size()) - 1;
}

void GlobalIRM::add_edge(int a, int b, double cost) {
  if (a == b || a < 0 || b < 0 || a >= size() || b >= size())
    throw std::out_of_range("GlobalIRM::add_edge: bad node id");
  edges_.push_back({a, b, cost});
}

void GlobalIRM::clear_frontiers() {
  nodes_.resize(static_cast<std::size_t>(breadcrumbs_));
  std::erase_if(edges_, [&](const GlobalEdge& e) { return e.a >= breadcrumbs_ || e.b >= breadcrumbs_; });
}

std::vector<int> GlobalIRM::frontier_ids() const {
  std::vector<int> ids;
  for (int i = breadcrumbs_; i < size(); ++i) ids.push_back(i);
  return ids;
}

std::vector<std::vector<std::pair<int, double>>> GlobalIRM::adjacency() const {
  std::vector<std::vector<std::pair<int, double>>> adj(nodes_.size());
  for (const auto& e : edges_) {
    adj[static_cast<std::size_t>(e.a)].emplace_back(e.b, e.cost);
    adj[static_cast<std::size_t>(e.b)].emplace_back(e.a, e.cost);
  }
  return adj;
}

std::string GlobalIRM::dump() const {
  std::ostringstream os;
  for (int i = 0; i < size(); ++i) {
    const auto& n = nodes_[static_cast<std::size_t>(i)];
    if (n.kind == NodeKind::Breadcrumb)
      os << "node " << i << " breadcrumb " << n.cell.x << ' ' << n.cell.y << ' ' << n.visit_step << '\n';
    else
      os << "node " << i << " frontier " << n.cell.x << ' ' << n.cell.y << ' ' << n.frontier_size << '\n';
  }
  for (const auto& e : edges_) os << "edge " << e.a << ' ' << e.b << ' ' << format_double(e.cost) << '\n';
  return os.str();
}

namespace {

/// Line of sight over believed occupancy; Unknown blocks.
bool believed_los(const Belief& b, Cell a, Cell c) {
  bool clear = true;
  supercover(a, c, [&](Cell m) {
    if (m != a && m != c && !b.known_free(m)) clear = false;
  });
  return clear;
}

}  // namespace

GlobalIRM update_global_irm(GlobalIRM g, const Belief& b, const std::vector<Frontier>& frontiers,
                            const IrmParams& params) {
  g.clear_frontiers();
  const RobotState& q = b.robot();
  const double cs = b.cell_size();

  const int last = g.breadcrumb_count() - 1;
  const double travelled = q.distance_traveled - g.last_breadcrumb_distance();
  bool fresh = b.known_free(q.cell);
  for (int i = 0; i <= last && fresh; ++i) fresh = g.node(i).cell != q.cell;
  if (last >= 0 && travelled >= params.d_bc - 1e-9 && fresh) {
    const int id = g.add_breadcrumb(q.cell, b.step());
    g.set_last_breadcrumb_distance(q.distance_traveled);
    const double reach = std::max(params.r_connect, travelled) * 3.0;
    const Cell src[] = {q.cell};
    const auto field = dijkstra(b, src, reach);
    const Cell prev = g.node(last).cell;
    // The chain edge is always kept so the breadcrumbs stay connected.
    g.add_edge(last, id, field.reached(prev) ? field.at(prev) : travelled);
    for (int i = 0; i < last; ++i) {
      const Cell c = g.node(i).cell;
      if (euclid_cells(c, q.cell) * cs > params.r_connect) continue;
      if (!field.reached(c) || !believed_los(b, q.cell, c)) continue;
      g.add_edge(i, id, field.at(c));
    }
  }

  std::vector<Cell> crumbs;
  for (int i = 0; i < g.breadcrumb_count(); ++i) crumbs.push_back(g.node(i).cell);
  const auto field = dijkstra(b, crumbs);
  for (const auto& f : frontiers) {
    const bool banned = std::any_of(f.cells.begin(), f.cells.end(), [&](Cell c) { return b.blacklisted(c); });
    if (banned || !field.reached(f.centroid)) continue;
    const int id = g.add_frontier(f.centroid, f.size(), f.cells);
    g.add_edge(field.source_at(f.centroid), id, field.at(f.centroid));
  }
  return g;
}

int nearest_breadcrumb(const GlobalIRM& g, const Belief& b) {
  const Cell src[] = {b.robot().cell};
  const auto field = dijkstra(b, src);
  int best = 0;
  double best_cost = DistanceField::kInf;
  for (int i = 0; i < g.breadcrumb_count(); ++i) {
    const Cell c = g.node(i).cell;
    if (field.reached(c) && field.at(c) < best_cost) {
      best_cost = field.at(c);
      best = i;
    }
  }
  if (best_cost < DistanceField::kInf) return best;
  double best_d = DistanceField::kInf;
  for (int i = 0; i < g.breadcrumb_count(); ++i) {
    const double d = euclid_cells(g.node(i).cell, b.robot().cell);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

std::optional<std::size_t> check_path(const Belief& b, Cell from, std::span<const Cell> cells) {
  Cell prev = from;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!adjacent8(prev, cells[i]) || !b.edge_cost(prev, cells[i])) return i;
    prev = cells[i];
  }
  return std::nullopt;
}

}  // namespace plgrim
