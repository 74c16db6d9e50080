// Serial reference vs OpenMP variant for the three parallel kernels.
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>

#include "plgrim/gcp.hpp"
#include "plgrim/harness.hpp"
#include "plgrim/lcp.hpp"

using namespace plgrim;

static double seconds(const std::function<void()>& f, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

static void report(const char* name, double serial, double parallel) {
  std::printf("%-18s serial %9.4f s   parallel %9.4f s   speedup %5.2fx\n", name, serial, parallel, serial / parallel);
}

// Long breadcrumb ladder with a frontier every few rungs.
static GlobalIRM ladder(int n) {
  GlobalIRM g = GlobalIRM::start({0, 0});
  for (int i = 1; i < n; ++i) {
    g.add_breadcrumb({i, 0}, i);
    g.add_edge(i - 1, i, 1.0 + 0.01 * (i % 7));
    if (i >= 3) g.add_edge(i - 3, i, 2.9);
  }
  for (int i = 0; i < n; i += 50) {
    const int f = g.add_frontier({i, 1}, 1 + i % 5);
    g.add_edge(i, f, 1.5);
  }
  return g;
}

int main() {
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
  Params params;

  {
    const GlobalIRM g = ladder(20000);
    GcpParams p = params.gcp;
    p.max_sweeps = 100000;
    const double s = seconds([&] { solve_gcp(g, p, 0, Exec::Serial); }, 3);
    const double t = seconds([&] { solve_gcp(g, p, 0, Exec::Parallel); }, 3);
    report("gcp value iter", s, t);
  }

  {
    const GridMap world = generate_maze(41, 41, 5, 0.0);
    Belief b(world.width(), world.height(), world.cell_size(), params.risk,
             RobotState{start_cell(world), 0.0, params.grid.speed});
    b.integrate(sense(world, b.robot(), params.grid.r_sense));
    const LocalIRM irm = rebuild_local_irm(b, params.irm.local_radius);
    const LocalModel model(b, irm, params.lcp, params.grid.r_sense, std::nullopt);
    PomcpOptions o;
    o.budget = 16384;
    o.trees = omp_get_max_threads() > 1 ? omp_get_max_threads() : 4;
    const double s = seconds([&] { o.exec = Exec::Serial; pomcp_plan(model, o); }, 2);
    const double t = seconds([&] { o.exec = Exec::Parallel; pomcp_plan(model, o); }, 2);
    report("pomcp trees", s, t);
  }

  {
    EpisodeConfig cfg;
    cfg.map = parse_map_gen("maze:31x31");
    cfg.max_steps = 400;
    std::vector<EpisodeConfig> cfgs;
    for (auto id : {PlannerId::Plgrim, PlannerId::Nbv, PlannerId::Hfe}) {
      cfg.planner = id;
      cfgs.push_back(cfg);
    }
    const std::vector<std::uint64_t> seeds{1, 2};
    const double s = seconds([&] { compare(cfgs, seeds, Exec::Serial); }, 1);
    const double t = seconds([&] { compare(cfgs, seeds, Exec::Parallel); }, 1);
    report("compare episodes", s, t);
  }

  // Soft budget: one default PLGRIM episode on a 101x101 maze under a minute.
  {
    EpisodeConfig cfg;
    cfg.map = parse_map_gen("maze:101x101");
    cfg.seed = 1;
    Metrics m;
    const double s = seconds([&] { m = run_episode(cfg); }, 1);
    std::printf("%-18s %9.2f s   coverage %.3f   steps %d   %s\n", "maze 101x101", s, m.final_coverage,
                m.rows.back().step, s < 60.0 ? "within 60 s" : "OVER 60 s");
  }
  return 0;
}
