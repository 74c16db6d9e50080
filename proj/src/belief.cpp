#include "plgrim/belief.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace plgrim {

Belief::Belief(int width, int height, double cell_size, const RiskParams& risk, RobotState robot)
    : width_(width),
      height_(height),
      cell_size_(cell_size),
      known_(static_cast<std::size_t>(width) * height, Knowledge::Unknown),
      covered_(static_cast<std::size_t>(width) * height, 0),
      viewed_(static_cast<std::size_t>(width) * height, 0),
      risk_(width, height, risk),
      robot_(robot) {}

double Belief::integrate(const Observation& z) {
  if (z.origin != robot_.cell) throw BeliefError("integrate: observation origin differs from robot cell");
  viewed_[index(z.origin)] = 1;
  double gain = 0.0;
  for (const auto& s : z.sensed) {
    const auto i = index(s.cell);
    if (s.occupancy == Occupancy::Occupied) {
      known_[i] = Knowledge::Occupied;
      continue;
    }
    known_[i] = Knowledge::Free;
    if (!covered_[i]) {
      covered_[i] = 1;
      ++covered_count_;
      gain += 1.0;
    }
  }
  update_risk_in_place(risk_, z, robot_.cell, step_, cell_size_);
  return gain;
}

void Belief::set_known(Cell c, Knowledge k) {
  known_[index(c)] = k;
  if (k != Knowledge::Free) set_covered(c, false);
}

void Belief::set_covered(Cell c, bool covered) {
  auto& slot = covered_[index(c)];
  if (slot && !covered) --covered_count_;
  if (!slot && covered) ++covered_count_;
  slot = covered ? 1 : 0;
}

std::optional<double> Belief::edge_cost(Cell a, Cell b) const {
  if (!known_free(a) || !known_free(b)) return std::nullopt;
  if (a.x != b.x && a.y != b.y &&
      (known({b.x, a.y}) == Knowledge::Occupied || known({a.x, b.y}) == Knowledge::Occupied))
    return std::nullopt;  // no cutting past a wall corner
  return edge_risk_cost(risk_, a, b, cell_size_);
}

bool Belief::blacklisted(Cell c) const {
  for (const auto& e : blacklist_) {
    if (e.until_step <= step_) continue;
    if (std::find(e.cells.begin(), e.cells.end(), c) != e.cells.end()) return true;
  }
  return false;
}

std::pair<Belief, double> integrate(Belief b, const Observation& z) {
  const double gain = b.integrate(z);
  return {std::move(b), gain};
}

double coverage_fraction(const Belief& b, const GridMap& truth) {
  if (b.width() != truth.width() || b.height() != truth.height())
    throw BeliefError("coverage_fraction: dimension mismatch");
  const auto total = truth.free_count();
  return total == 0 ? 0.0 : static_cast<double>(b.covered_count()) / static_cast<double>(total);
}

namespace {

constexpr double kTieTol = 1e-9;

bool tied(double a, double b) { return std::abs(a - b) <= kTieTol * std::max(1.0, std::abs(a)); }

}  // namespace

DistanceField dijkstra(const Belief& b, std::span<const Cell> sources, double max_cost,
                       std::optional<Cell> stop_at) {
  const auto n = static_cast<std::size_t>(b.width()) * b.height();
  DistanceField f{b.width(), std::vector<double>(n, DistanceField::kInf), std::vector<int>(n, -1),
                  std::vector<int>(n, -1)};
  struct Item {
    double cost;
    int hops;
    std::size_t index;
    bool operator>(const Item& o) const {
      if (cost != o.cost) return cost > o.cost;
      if (hops != o.hops) return hops > o.hops;
      return index > o.index;
    }
  };
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  for (std::size_t s = 0; s < sources.size(); ++s) {
    const Cell c = sources[s];
    if (!b.known_free(c)) continue;
    const auto i = b.index(c);
    if (f.cost[i] == 0.0) continue;  // duplicate source keeps the first label
    f.cost[i] = 0.0;
    f.hops[i] = 0;
    f.source[i] = static_cast<int>(s);
    open.push({0.0, 0, i});
  }
  std::vector<std::uint8_t> settled(n, 0);
  while (!open.empty()) {
    const Item top = open.top();
    open.pop();
    if (settled[top.index]) continue;
    if (top.cost != f.cost[top.index] || top.hops != f.hops[top.index]) continue;
    if (top.cost > max_cost) break;
    settled[top.index] = 1;
    const Cell c{static_cast<int>(top.index % b.width()), static_cast<int>(top.index / b.width())};
    if (stop_at && *stop_at == c) break;
    for (Cell d : kNeighbors8) {
      const Cell m = c + d;
      if (!b.known_free(m)) continue;
      const auto j = b.index(m);
      if (settled[j]) continue;
      const auto w = b.edge_cost(c, m);
      if (!w) continue;
      const double nc = top.cost + *w;
      const int nh = top.hops + 1;
      const bool better = f.cost[j] == DistanceField::kInf ||
                          (nc < f.cost[j] && !tied(nc, f.cost[j])) ||
                          (tied(nc, f.cost[j]) && nh < f.hops[j]);
      if (!better) continue;
      f.cost[j] = nc;
      f.hops[j] = nh;
      f.source[j] = f.source[top.index];
      open.push({nc, nh, j});
    }
  }
  return f;
}

std::optional<Path> shortest_path(const Belief& b, Cell from, Cell to) {
  if (!b.known_free(from) || !b.known_free(to))
    throw BeliefError("shortest_path: endpoints must be known free");
  if (from == to) return Path{};
  // Rooting the field at the goal lets the forward walk pick, at every cell,
  // the first direction that stays on an optimal path.
  const Cell goal[] = {to};
  const auto field = dijkstra(b, goal, DistanceField::kInf, from);
  if (!field.reached(from)) return std::nullopt;

  Path path;
  path.cost = field.at(from);
  Cell cur = from;
  while (cur != to) {
    bool advanced = false;
    for (Cell d : kNeighbors8) {
      const Cell m = cur + d;
      if (!b.known_free(m) || !field.reached(m)) continue;
      if (field.hops_at(m) != field.hops_at(cur) - 1) continue;
      const auto w = b.edge_cost(cur, m);
      if (!w || !tied(field.at(m) + *w, field.at(cur))) continue;
      path.cells.push_back(m);
      cur = m;
      advanced = true;
      break;
    }
    if (!advanced) return std::nullopt;  // unreachable with a consistent field
  }
  return path;
}

}  // namespace plgrim
