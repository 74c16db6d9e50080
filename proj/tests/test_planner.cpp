#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "plgrim/harness.hpp"
#include "plgrim/planner.hpp"
#include "support.hpp"

using namespace plgrim;

static GlobalIRM graph_for(const Belief& b, const Params& p) {
  return update_global_irm(GlobalIRM::start(b.robot().cell), b, detect_frontiers(b, p.irm.min_frontier_size), p.irm);
}

static void check_chain(Cell from, const std::vector<Cell>& cells) {
  for (Cell c : cells) {
    CHECK(adjacent8(from, c));
    from = c;
  }
}

static std::set<std::pair<Cell, Cell>> traversable_edges(const Belief& b) {
  std::set<std::pair<Cell, Cell>> out;
  for (int y = 0; y < b.height(); ++y)
    for (int x = 0; x < b.width(); ++x)
      for (Cell d : kNeighbors8)
        if (b.edge_cost({x, y}, Cell{x, y} + d)) out.insert({{x, y}, Cell{x, y} + d});
  return out;
}

TEST_CASE("common_prefix and mode names") {
  const std::vector<Cell> a{{0, 0}, {1, 0}, {2, 0}}, b{{0, 0}, {1, 0}, {1, 1}};
  CHECK(common_prefix(a, b) == 2);
  CHECK(common_prefix(a, a) == 3);
  CHECK(common_prefix(a, {}) == 0);
  CHECK(mode_name(Mode::LocalCoverage) == "local");
  CHECK(mode_name(Mode::GlobalTransit) == "global");
  CHECK(mode_name(Mode::Done) == "done");
}

TEST_CASE("plan_episode mode rules") {
  Params p;
  p.lcp.budget = 512;
  const GridMap room = support::fixture("room.map");

  SUBCASE("frontier inside the window: local coverage") {
    const Belief b = support::known_belief(room, {3, 3}, p, [](Cell c) { return c.x <= 8; },
                                           [](Cell c) { return c.x >= 6; });
    const GlobalIRM g = graph_for(b, p);
    const Plan plan = plan_episode(b, g, nullptr, p);
    CHECK(plan.mode == Mode::LocalCoverage);
    CHECK(plan.theta >= 0);
    REQUIRE_FALSE(plan.cells.empty());
    check_chain({3, 3}, plan.cells);
    for (Cell c : plan.cells) {
      CHECK(chebyshev(c, {3, 3}) <= p.irm.local_radius);
      CHECK(b.known_free(c));
    }
  }
  SUBCASE("covered window, distant frontier: global transit") {
    const GridMap w = support::fixture("corridors.map");
    const Belief b = support::known_belief(w, {2, 5}, p, [](Cell c) { return c.x <= 40; });
    const GlobalIRM g = graph_for(b, p);
    REQUIRE(g.frontier_ids().size() == 2);
    const Plan plan = plan_episode(b, g, nullptr, p);
    CHECK(plan.mode == Mode::GlobalTransit);
    REQUIRE(plan.target);
    CHECK(plan.target->x == 40);
    REQUIRE_FALSE(plan.cells.empty());
    CHECK(plan.cells.back() == *plan.target);
    check_chain({2, 5}, plan.cells);
  }
  SUBCASE("nothing left: done") {
    const Belief b = support::known_belief(room, {3, 3}, p);
    const Plan plan = plan_episode(b, graph_for(b, p), nullptr, p);
    CHECK(plan.mode == Mode::Done);
    CHECK(plan.cells.empty());
  }
  SUBCASE("no frontier but an uncovered pocket: not done") {
    const Belief b = support::known_belief(room, {3, 3}, p, [](Cell) { return true; },
                                           [](Cell c) { return c == Cell{9, 9}; });
    const Plan plan = plan_episode(b, graph_for(b, p), nullptr, p);
    CHECK(plan.mode == Mode::LocalCoverage);
    CHECK_FALSE(plan.cells.empty());
  }
}

TEST_CASE("near-tied transit plans keep the previous route") {
  Params p;
  const GridMap w = support::fixture("corridors.map");
  const Belief b = support::known_belief(w, {2, 5}, p, [](Cell c) { return c.x <= 40; });
  const GlobalIRM g = graph_for(b, p);
  for (Cell goal : {Cell{40, 2}, Cell{40, 8}}) {
    Plan prev;
    prev.mode = Mode::GlobalTransit;
    prev.cells = shortest_path(b, {2, 5}, goal)->cells;
    const Plan plan = plan_episode(b, g, &prev, p);
    CHECK(plan.mode == Mode::GlobalTransit);
    REQUIRE(plan.target);
    CHECK(*plan.target == goal);
    CHECK(plan.cells == prev.cells);
  }
}

TEST_CASE("execute_step") {
  Params p;
  const GridMap world = load_map("##########\n#S.......#\n##########\n");

  SUBCASE("clear corridor: Ok each step, coverage grows, plan consumed") {
    Belief b(world.width(), world.height(), world.cell_size(), p.risk, RobotState{{1, 1}});
    p.grid.r_sense = 1.0;
    b.integrate(sense(world, b.robot(), p.grid.r_sense));
    Plan plan;
    plan.mode = Mode::LocalCoverage;
    plan.cells = {{2, 1}, {3, 1}};
    double cov = coverage_fraction(b, world);
    while (!plan.cells.empty()) {
      const auto ev = execute_step(world, b, plan, p);
      CHECK(ev.kind == StepEvent::Kind::Ok);
      CHECK(coverage_fraction(b, world) > cov);
      cov = coverage_fraction(b, world);
    }
    CHECK(b.robot().cell == Cell{3, 1});
    CHECK(b.step() == 2);
    CHECK(execute_step(world, b, plan, p).kind == StepEvent::Kind::Ok);
    CHECK(b.robot().cell == Cell{3, 1});
  }
  SUBCASE("a newly sensed wall invalidates the plan at the blocked edge") {
    const GridMap walled = load_map("##########\n#S....#..#\n##########\n");
    Belief b = support::known_belief(world, {1, 1}, p);
    Plan plan;
    plan.mode = Mode::LocalCoverage;
    plan.cells = {{2, 1}, {3, 1}, {4, 1}, {5, 1}, {6, 1}, {7, 1}};
    const auto ev = execute_step(walled, b, plan, p);
    CHECK(ev.kind == StepEvent::Kind::PlanInvalidated);
    CHECK(ev.index == 3);
    CHECK(plan.cells[ev.index] == Cell{6, 1});
  }
  SUBCASE("contract violations") {
    Belief b = support::known_belief(world, {1, 1}, p);
    Plan far;
    far.mode = Mode::LocalCoverage;
    far.cells = {{3, 1}};
    CHECK_THROWS_AS(execute_step(world, b, far, p), std::logic_error);
    Plan done;
    CHECK_THROWS_AS(execute_step(world, b, done, p), std::logic_error);
  }
}

TEST_CASE("resiliency stages on the trap fixture") {
  Params p;
  const GridMap w = support::fixture("trap.map");
  Belief b(w.width(), w.height(), w.cell_size(), p.risk, RobotState{*w.start()});
  b.integrate(sense(w, b.robot(), p.grid.r_sense));
  const auto target = [&]() -> std::optional<Cell> {
    const GlobalIRM g = graph_for(b, p);
    const auto pol = solve_gcp(g, p.gcp, nearest_breadcrumb(g, b));
    if (!pol) return std::nullopt;
    return g.node(pol->target_frontier).cell;
  };

  // Both frontiers sit behind hazard bands above the threshold.
  const auto fronts = detect_frontiers(b, 1);
  REQUIRE(fronts.size() == 2);
  CHECK_FALSE(target());
  CHECK(plan_episode(b, graph_for(b, p), nullptr, p).mode == Mode::Recovery);

  CHECK(resiliency_step(b, p) == 1);
  CHECK(b.risk().r_max() == doctest::Approx(0.6));
  CHECK(b.risk().at({17, 4}).confidence == 0.0);
  b.integrate(sense(w, b.robot(), p.grid.r_sense));
  const auto before = traversable_edges(b);
  CHECK_FALSE(target());

  CHECK(resiliency_step(b, p) == 2);
  CHECK(b.risk().r_max() == doctest::Approx(0.9));
  const auto after = traversable_edges(b);
  CHECK(after.size() > before.size());
  CHECK(std::includes(after.begin(), after.end(), before.begin(), before.end()));
  const auto first = target();
  REQUIRE(first);

  CHECK(resiliency_step(b, p) == 3);
  CHECK(b.risk().r_max() == doctest::Approx(1.35));
  REQUIRE(b.blacklist().size() == 1);
  const auto second = target();
  REQUIRE(second);
  CHECK(*second != *first);
  // The two frontiers are the ends of the two corridors.
  std::set<Cell> ends{fronts[0].centroid, fronts[1].centroid};
  CHECK(ends.count(*first) == 1);
  CHECK(ends.count(*second) == 1);
  CHECK(resiliency_step(b, p) == 3);
}

TEST_CASE("liveness and safety on small zero-hazard mazes") {
  for (std::uint64_t seed : {1, 2, 3}) {
    EpisodeConfig cfg;
    cfg.map.kind = MapSource::Kind::Maze;
    cfg.map.width = 21;
    cfg.map.height = 21;
    cfg.seed = seed;
    cfg.params.lcp.budget = 512;
    const GridMap world = load_source(cfg.map, cfg.seed, cfg.params.grid.cell_size);
    cfg.max_steps = 20 * static_cast<int>(world.free_count());
    int unsafe = 0;
    EpisodeHooks hooks;
    hooks.on_step = [&](const GridMap& wm, const Belief& b, Cell next) {
      if (!wm.is_free(next) || !b.known_free(next)) ++unsafe;
    };
    hooks.on_commit = [&](const Belief& b, const Plan& plan) {
      Cell at = b.robot().cell;
      for (Cell c : plan.cells) {
        if (!b.edge_cost(at, c)) ++unsafe;
        at = c;
      }
    };
    const Metrics m = run_episode(cfg, hooks);
    CHECK(m.done);
    CHECK(m.final_coverage == 1.0);
    CHECK(unsafe == 0);
  }
}
