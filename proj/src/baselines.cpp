#include "plgrim/baselines.hpp"

#include <algorithm>

namespace plgrim {

int predicted_coverage(const Belief& b, Cell view, double r_sense) {
  const auto table = VisibilityTable::get(r_sense / b.cell_size());
  int count = 0;
  for (const auto& ray : table->rays()) {
    const Cell c = view + ray.offset;
    if (!b.in_bounds(c) || b.covered(c) || b.known(c) == Knowledge::Occupied) continue;
    bool clear = true;
    for (Cell d : table->between(ray)) {
      if (b.known(view + d) == Knowledge::Occupied) {
        clear = false;
        break;
      }
    }
    if (clear) ++count;
  }
  return count;
}

double view_utility(const Belief& b, Cell view, double path_cost, const Params& params) {
  return params.lcp.lambda_i * predicted_coverage(b, view, params.grid.r_sense) - params.lcp.lambda_c * path_cost;
}

std::optional<Path> path_to_nearest_frontier(const Belief& b, const std::vector<std::vector<Cell>>& frontiers,
                                             int* chosen) {
  const Cell q = b.robot().cell;
  const Cell src[] = {q};
  const auto field = dijkstra(b, src);
  std::optional<Cell> goal;
  int which = -1;
  for (std::size_t i = 0; i < frontiers.size(); ++i)
    for (Cell c : frontiers[i]) {
      if (c == q || !field.reached(c)) continue;
      if (!goal || field.at(c) < field.at(*goal) || (field.at(c) == field.at(*goal) && c < *goal)) {
        goal = c;
        which = static_cast<int>(i);
      }
    }
  if (!goal) return std::nullopt;
  if (chosen) *chosen = which;
  return shortest_path(b, q, *goal);
}

NbvResult nbv_plan(const Belief& b, const Params& params, Rng& sampling) {
  const Cell q = b.robot().cell;
  const double r_view = params.nbv.r_view / b.cell_size();
  const int reach = static_cast<int>(r_view);
  std::vector<Cell> pool;
  for (int y = q.y - reach; y <= q.y + reach; ++y)
    for (int x = q.x - reach; x <= q.x + reach; ++x) {
      const Cell c{x, y};
      if (c != q && b.known_free(c) && euclid_cells(c, q) <= r_view + 1e-9) pool.push_back(c);
    }

  NbvResult out;
  out.plan.mode = Mode::LocalCoverage;
  out.plan.created_at = b.step();
  if (!pool.empty()) {
    std::vector<Cell> views;
    for (int i = 0; i < params.nbv.n_samples; ++i) views.push_back(pool[sampling.below(pool.size())]);
    std::sort(views.begin(), views.end());
    views.erase(std::unique(views.begin(), views.end()), views.end());

    const Cell src[] = {q};
    const auto field = dijkstra(b, src);
    const ViewCandidate* best = nullptr;
    for (Cell v : views) {
      if (!field.reached(v)) continue;
      out.candidates.push_back({v, {}, view_utility(b, v, field.at(v), params)});
    }
    // Views are sorted, so the first maximum is the lexicographically smallest.
    for (const auto& c : out.candidates)
      if (!best || c.utility > best->utility) best = &c;
    if (best && best->utility > 0.0) {
      const auto path = shortest_path(b, q, best->cell);
      if (path && !path->cells.empty()) {
        out.plan.cells = path->cells;
        out.plan.value = best->utility;
        out.plan.target = best->cell;
        return out;
      }
    }
  }

  std::vector<std::vector<Cell>> local;
  for (auto& f : detect_frontiers(b, params.irm.min_frontier_size))
    if (euclid_cells(f.centroid, q) <= r_view + 1e-9) local.push_back(std::move(f.cells));
  if (auto path = path_to_nearest_frontier(b, local); path && !path->cells.empty()) {
    out.plan.mode = Mode::GlobalTransit;
    out.plan.cells = std::move(path->cells);
    out.plan.target = out.plan.cells.back();
    return out;
  }
  out.no_progress = true;
  return out;
}

Plan hfe_plan(const Belief& b, const GlobalIRM& g, const Params& params) {
  Plan plan;
  plan.mode = Mode::GlobalTransit;
  plan.created_at = b.step();
  const Cell q = b.robot().cell;
  const double r_local = params.hfe.r_local / b.cell_size();

  std::vector<std::vector<Cell>> local;
  for (auto& f : detect_frontiers(b, params.irm.min_frontier_size))
    if (euclid_cells(f.centroid, q) <= r_local + 1e-9) local.push_back(std::move(f.cells));
  auto path = path_to_nearest_frontier(b, local);

  int chosen = -1;
  const auto ids = g.frontier_ids();
  if (!path) {
    std::vector<std::vector<Cell>> global;
    for (int id : ids) global.push_back(g.node(id).members);
    path = path_to_nearest_frontier(b, global, &chosen);
    if (path) plan.theta = ids[static_cast<std::size_t>(chosen)];
  }
  if (!path || path->cells.empty()) {
    plan.mode = Mode::Done;
    return plan;
  }
  plan.cells = std::move(path->cells);
  plan.target = plan.cells.back();
  plan.value = -path->cost;
  return plan;
}

}  // namespace plgrim
