#include "plgrim/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>

#include "plgrim/baselines.hpp"
#include "plgrim/rng.hpp"

namespace plgrim {

std::string_view planner_name(PlannerId id) {
  switch (id) {
    case PlannerId::Plgrim: return "plgrim";
    case PlannerId::Nbv: return "nbv";
    case PlannerId::Hfe: return "hfe";
  }
  return "?";
}

std::optional<PlannerId> parse_planner(std::string_view name) {
  for (auto id : {PlannerId::Plgrim, PlannerId::Nbv, PlannerId::Hfe})
    if (planner_name(id) == name) return id;
  return std::nullopt;
}

std::string planner_names() { return "plgrim, nbv, hfe"; }

namespace {

int parse_int(std::string_view s, std::string_view what) {
  int v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw std::invalid_argument("bad " + std::string(what) + ": '" + std::string(s) + "'");
  return v;
}

double parse_double(std::string_view s, std::string_view what) {
  double v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw std::invalid_argument("bad " + std::string(what) + ": '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  for (;;) {
    const auto i = s.find(sep);
    out.push_back(s.substr(0, i));
    if (i == std::string_view::npos) return out;
    s.remove_prefix(i + 1);
  }
}

}  // namespace

MapSource parse_map_gen(std::string_view spec) {
  const auto parts = split(spec, ':');
  MapSource src;
  if (parts[0] == "maze") {
    if (parts.size() < 2 || parts.size() > 3) throw std::invalid_argument("expected maze:WxH[:dD]");
    const auto dims = split(parts[1], 'x');
    if (dims.size() != 2) throw std::invalid_argument("expected maze:WxH[:dD]");
    src.kind = MapSource::Kind::Maze;
    src.width = parse_int(dims[0], "maze width");
    src.height = parse_int(dims[1], "maze height");
    if (parts.size() == 3) {
      if (parts[2].empty() || parts[2][0] != 'd') throw std::invalid_argument("expected hazard density as dD");
      src.hazard_density = parse_double(parts[2].substr(1), "hazard density");
    }
    return src;
  }
  if (parts[0] == "subway") {
    if (parts.size() != 2) throw std::invalid_argument("expected subway:S");
    src.kind = MapSource::Kind::Subway;
    src.scale = parse_int(parts[1], "subway scale");
    return src;
  }
  throw std::invalid_argument("unknown map generator '" + std::string(parts[0]) + "' (maze, subway)");
}

// ---------------------------------------------------------------------------
// Generators

GridMap generate_subway(int scale, std::uint64_t seed, double cell_size) {
  if (scale < 1) throw std::invalid_argument("generate_subway: scale must be >= 1");
  const int room = 12 * scale;
  const int wall = 3 * scale;
  const int corridor = 2 * scale;
  const int side = 3 * room + 2 * wall + 2;
  GridMap map(side, side, cell_size);
  const auto origin = [&](int i) { return 1 + i * (room + wall); };
  for (int ry = 0; ry < 3; ++ry)
    for (int rx = 0; rx < 3; ++rx)
      for (int y = 0; y < room; ++y)
        for (int x = 0; x < room; ++x) map.set_free({origin(rx) + x, origin(ry) + y});

  // Room adjacency: a random spanning tree plus a coin flip per extra link.
  Rng rng(seed);
  struct Link {
    int a, b;
  };
  std::vector<Link> links;
  for (int r = 0; r < 9; ++r) {
    if (r % 3 < 2) links.push_back({r, r + 1});
    if (r < 6) links.push_back({r, r + 3});
  }
  std::vector<int> parent(9);
  for (int i = 0; i < 9; ++i) parent[static_cast<std::size_t>(i)] = i;
  const auto find = [&](int i) {
    while (parent[static_cast<std::size_t>(i)] != i) i = parent[static_cast<std::size_t>(i)];
    return i;
  };
  for (std::size_t i = links.size(); i > 1; --i) std::swap(links[i - 1], links[rng.below(i)]);
  for (const Link& l : links) {
    const bool tree = find(l.a) != find(l.b);
    if (tree) parent[static_cast<std::size_t>(find(l.a))] = find(l.b);
    if (!tree && !rng.bernoulli(0.5)) continue;
    const int offset = 2 * scale + static_cast<int>(rng.below(static_cast<std::uint64_t>(room - corridor - 4 * scale + 1)));
    const int ax = l.a % 3, ay = l.a / 3;
    if (l.b == l.a + 1) {
      const int x0 = origin(ax) + room;
      for (int x = x0; x < x0 + wall; ++x)
        for (int w = 0; w < corridor; ++w) map.set_free({x, origin(ay) + offset + w});
    } else {
      const int y0 = origin(ay) + room;
      for (int y = y0; y < y0 + wall; ++y)
        for (int w = 0; w < corridor; ++w) map.set_free({origin(ax) + offset + w, y});
    }
  }
  map.set_start({origin(0) + room / 2, origin(0) + room / 2});
  return map;
}

GridMap generate_maze(int width, int height, std::uint64_t seed, double hazard_density, double cell_size) {
  if (width < 7 || height < 7 || width % 2 == 0 || height % 2 == 0)
    throw std::invalid_argument("generate_maze: width and height must be odd and >= 7");
  if (hazard_density < 0.0 || hazard_density > 1.0)
    throw std::invalid_argument("generate_maze: hazard_density must be in [0, 1]");
  GridMap map(width, height, cell_size);
  Rng rng(seed);

  const Cell dirs[4] = {{0, -2}, {2, 0}, {0, 2}, {-2, 0}};
  std::vector<Cell> stack{{1, 1}};
  map.set_free({1, 1});
  while (!stack.empty()) {
    const Cell c = stack.back();
    Cell options[4];
    int n = 0;
    for (Cell d : dirs) {
      const Cell m = c + d;
      if (m.x > 0 && m.y > 0 && m.x < width - 1 && m.y < height - 1 && !map.is_free(m)) options[n++] = m;
    }
    if (n == 0) {
      stack.pop_back();
      continue;
    }
    const Cell m = options[rng.below(static_cast<std::uint64_t>(n))];
    map.set_free({(c.x + m.x) / 2, (c.y + m.y) / 2});
    map.set_free(m);
    stack.push_back(m);
  }

  // Knock out a fifth of the remaining interior walls between two passages.
  std::vector<Cell> walls;
  for (int y = 1; y < height - 1; ++y)
    for (int x = 1; x < width - 1; ++x) {
      if ((x + y) % 2 == 0 || map.is_free({x, y})) continue;
      const bool horizontal = x % 2 == 0;
      const Cell a = horizontal ? Cell{x - 1, y} : Cell{x, y - 1};
      const Cell b = horizontal ? Cell{x + 1, y} : Cell{x, y + 1};
      if (map.is_free(a) && map.is_free(b)) walls.push_back({x, y});
    }
  const auto knock = static_cast<std::size_t>(std::lround(0.2 * static_cast<double>(walls.size())));
  for (std::size_t i = 0; i < knock; ++i) {
    std::swap(walls[i], walls[i + rng.below(walls.size() - i)]);
    map.set_free(walls[i]);
  }

  const Cell start{1, 1};
  std::vector<Cell> free;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      if (map.is_free({x, y}) && Cell{x, y} != start) free.push_back({x, y});
  const auto hazards = static_cast<std::size_t>(std::lround(hazard_density * static_cast<double>(free.size())));
  for (std::size_t i = 0; i < hazards; ++i) {
    std::swap(free[i], free[i + rng.below(free.size() - i)]);
    map.set_free(free[i], (3 + static_cast<int>(rng.below(7))) / 10.0);
  }
  map.set_start(start);
  return map;
}

GridMap load_source(const MapSource& src, std::uint64_t episode_seed, double cell_size) {
  const std::uint64_t seed = src.map_seed ? *src.map_seed : derive_seed(episode_seed, "map");
  switch (src.kind) {
    case MapSource::Kind::File: {
      std::ifstream in(src.path, std::ios::binary);
      if (!in) throw std::runtime_error("cannot open map file '" + src.path + "'");
      std::stringstream ss;
      ss << in.rdbuf();
      return load_map(ss.str(), cell_size);
    }
    case MapSource::Kind::Maze:
      return generate_maze(src.width, src.height, seed, src.hazard_density, cell_size);
    case MapSource::Kind::Subway:
      return generate_subway(src.scale, seed, cell_size);
  }
  throw std::logic_error("load_source: bad kind");
}

Cell start_cell(const GridMap& map) {
  if (map.start()) return *map.start();
  for (std::size_t i = 0; i < map.size(); ++i)
    if (map.is_free(map.cell_at(i))) return map.cell_at(i);
  throw GridError("start_cell: map has no free cell");
}

bool free_space_connected(const GridMap& map) {
  std::vector<std::uint8_t> seen(map.size(), 0);
  std::deque<Cell> queue{start_cell(map)};
  seen[map.index(queue.front())] = 1;
  std::size_t reached = 1;
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    for (Cell d : kNeighbors8) {
      const Cell m = c + d;
      if (!map.is_free(m) || seen[map.index(m)]) continue;
      seen[map.index(m)] = 1;
      ++reached;
      queue.push_back(m);
    }
  }
  return reached == map.free_count();
}

// ---------------------------------------------------------------------------
// Episodes

namespace {

class Episode {
 public:
  Episode(const EpisodeConfig& cfg, const EpisodeHooks& hooks)
      : cfg_(cfg),
        hooks_(hooks),
        world_(load_source(cfg.map, cfg.seed, cfg.params.grid.cell_size)) {
    const Cell s = start_cell(world_);
    belief_ = Belief(world_.width(), world_.height(), world_.cell_size(), cfg.params.risk,
                     RobotState{s, 0.0, cfg.params.grid.speed});
    belief_.integrate(sense(world_, belief_.robot(), cfg.params.grid.r_sense));
    graph_ = GlobalIRM::start(s, 0.0, 0);
  }

  Metrics run() {
    try {
      loop();
    } catch (const std::exception& e) {
      metrics_.end_reason = std::string("error: ") + e.what();
    }
    finish();
    return std::move(metrics_);
  }

 private:
  const Params& params() const { return cfg_.params; }

  void record() {
    MetricsRow row;
    row.step = belief_.step();
    row.distance_m = belief_.robot().distance_traveled;
    row.time_s = row.distance_m / params().grid.speed;
    row.coverage = coverage_fraction(belief_, world_);
    row.mode = plan_.mode;
    row.replans = replans_;
    row.recoveries = recoveries_;
    metrics_.rows.push_back(row);
  }

  void replan() {
    const auto frontiers = detect_frontiers(belief_, params().irm.min_frontier_size);
    graph_ = update_global_irm(std::move(graph_), belief_, frontiers, params().irm);
    const auto counter = static_cast<std::uint64_t>(replans_);
    Plan next;
    switch (cfg_.planner) {
      case PlannerId::Plgrim: {
        PlanOptions opt{derive_seed(cfg_.seed, "plan", {counter}), cfg_.exec};
        next = plan_episode(belief_, graph_, &plan_, params(), opt);
        break;
      }
      case PlannerId::Nbv: {
        Rng sampling(derive_seed(cfg_.seed, "sampling", {counter}));
        auto r = nbv_plan(belief_, params(), sampling);
        next = std::move(r.plan);
        if (r.no_progress) {
          ++metrics_.no_progress;
          std::vector<std::vector<Cell>> all;
          for (const auto& f : frontiers) all.push_back(f.cells);
          const auto path = path_to_nearest_frontier(belief_, all);
          next.mode = Mode::GlobalTransit;
          if (path && !path->cells.empty()) {
            next.cells = path->cells;
            next.target = next.cells.back();
          } else {
            next.mode = frontiers.empty() ? Mode::Done : Mode::Recovery;
          }
        }
        break;
      }
      case PlannerId::Hfe:
        next = hfe_plan(belief_, graph_, params());
        break;
    }
    ++replans_;
    plan_ = std::move(next);
    since_plan_ = 0;
    if (!plan_.cells.empty()) {
      if (hooks_.on_commit) hooks_.on_commit(belief_, plan_);
      belief_.set_recovery_stage(0);
    }
  }

  bool replan_due(bool invalidated) const {
    if (plan_.cells.empty() || invalidated) return true;
    if (cfg_.planner == PlannerId::Nbv) return false;  // commits until arrival
    return since_plan_ >= params().plgrim.k_replan;
  }

  void loop() {
    const int f_recover = params().plgrim.f_recover;
    replan();
    record();
    int failures = 0;
    int stalls = 0;
    bool invalidated = false;
    while (belief_.step() < cfg_.max_steps) {
      if (plan_.mode == Mode::Done) {
        metrics_.done = true;
        metrics_.end_reason = "done";
        return;
      }
      if (replan_due(invalidated)) {
        replan();
        invalidated = false;
        if (plan_.mode == Mode::Done) continue;
      }
      if (plan_.cells.empty()) {
        // No committed-safe plan. Only PLGRIM has recovery behaviors.
        if (cfg_.planner != PlannerId::Plgrim || ++stalls > 8 * f_recover) {
          metrics_.end_reason = "stuck";
          return;
        }
        if (++failures >= f_recover) recover(failures);
        continue;
      }
      if (hooks_.on_step) hooks_.on_step(world_, belief_, plan_.cells.front());
      const StepEvent ev = execute_step(world_, belief_, plan_, params());
      ++since_plan_;
      stalls = 0;
      if (ev.kind == StepEvent::Kind::PlanInvalidated) {
        invalidated = true;
        ++failures;
        if (cfg_.planner == PlannerId::Plgrim && failures >= f_recover) recover(failures);
      } else {
        failures = 0;
      }
      record();
    }
    metrics_.end_reason = "max_steps";
  }

  void recover(int& failures) {
    resiliency_step(belief_, params());
    ++recoveries_;
    failures = 0;
    belief_.integrate(sense(world_, belief_.robot(), params().grid.r_sense));
    plan_.cells.clear();
  }

  void finish() {
    if (metrics_.rows.empty()) record();
    const auto& last = metrics_.rows.back();
    metrics_.final_coverage = last.coverage;
    metrics_.total_distance = last.distance_m;
    for (const auto& r : metrics_.rows)
      if (r.coverage >= 0.9) {
        metrics_.steps_to_90 = r.step;
        break;
      }
  }

  const EpisodeConfig& cfg_;
  const EpisodeHooks& hooks_;
  GridMap world_;
  Belief belief_;
  GlobalIRM graph_;
  Plan plan_;
  Metrics metrics_;
  int replans_ = 0;
  int recoveries_ = 0;
  int since_plan_ = 0;
};

void append_double(std::string& out, double v) { out += format_double(v); }

}  // namespace

Metrics run_episode(const EpisodeConfig& cfg, const EpisodeHooks& hooks) {
  if (cfg.max_steps < 1) throw std::invalid_argument("run_episode: max_steps must be >= 1");
  return Episode(cfg, hooks).run();
}

std::string metrics_csv(const Metrics& m) {
  std::string out = "step,time_s,coverage,distance_m,mode,replans,recoveries\n";
  for (const auto& r : m.rows) {
    out += std::to_string(r.step);
    out += ',';
    append_double(out, r.time_s);
    out += ',';
    append_double(out, r.coverage);
    out += ',';
    append_double(out, r.distance_m);
    out += ',';
    out += mode_name(r.mode);
    out += ',';
    out += std::to_string(r.replans);
    out += ',';
    out += std::to_string(r.recoveries);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Comparison

double coverage_at(const Metrics& m, double t) {
  double c = 0.0;
  for (const auto& r : m.rows) {
    if (r.time_s > t + 1e-9) break;
    c = r.coverage;
  }
  return c;
}

std::vector<ComparisonRow> aggregate(const std::vector<EpisodeConfig>& cfgs,
                                     const std::vector<std::vector<Metrics>>& runs) {
  double t_end = 0.0;
  for (const auto& per_cfg : runs)
    for (const auto& m : per_cfg)
      if (!m.rows.empty()) t_end = std::max(t_end, m.rows.back().time_s);
  const double dt = cfgs.front().params.harness.time_step;
  if (!(dt > 0.0)) throw std::invalid_argument("compare: harness.time_step must be positive");
  const auto ticks = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));

  std::vector<ComparisonRow> rows;
  std::vector<double> sample;
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    for (std::size_t k = 0; k <= ticks; ++k) {
      const double t = static_cast<double>(k) * dt;
      sample.clear();
      for (const auto& m : runs[i]) sample.push_back(coverage_at(m, t));
      std::sort(sample.begin(), sample.end());
      ComparisonRow row;
      row.time_s = t;
      row.planner = cfgs[i].planner;
      row.n_runs = static_cast<int>(sample.size());
      double sum = 0.0;
      for (double v : sample) sum += v;
      row.mean_coverage = sum / static_cast<double>(sample.size());
      const std::size_t h = sample.size() / 2;
      row.median_coverage = sample.size() % 2 ? sample[h] : 0.5 * (sample[h - 1] + sample[h]);
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<ComparisonRow> compare(const std::vector<EpisodeConfig>& cfgs, const std::vector<std::uint64_t>& seeds,
                                   Exec exec) {
  if (cfgs.empty() || seeds.empty()) throw std::invalid_argument("compare: need at least one config and one seed");
  for (const auto& c : cfgs)
    if (!(c.map == cfgs.front().map)) throw std::invalid_argument("compare: configs use different maps");

  const std::size_t n = cfgs.size() * seeds.size();
  std::vector<std::vector<Metrics>> runs(cfgs.size(), std::vector<Metrics>(seeds.size()));
  const auto one = [&](std::size_t k) {
    EpisodeConfig cfg = cfgs[k / seeds.size()];
    cfg.seed = seeds[k % seeds.size()];
    if (exec == Exec::Parallel) cfg.exec = Exec::Serial;  // no nested teams
    runs[k / seeds.size()][k % seeds.size()] = run_episode(cfg);
  };
  if (exec == Exec::Parallel) {
    const auto count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (long k = 0; k < count; ++k) one(static_cast<std::size_t>(k));
  } else {
    for (std::size_t k = 0; k < n; ++k) one(k);
  }
  return aggregate(cfgs, runs);
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::string out = "time_s,planner,mean_coverage,median_coverage,n_runs\n";
  for (const auto& r : rows) {
    append_double(out, r.time_s);
    out += ',';
    out += planner_name(r.planner);
    out += ',';
    append_double(out, r.mean_coverage);
    out += ',';
    append_double(out, r.median_coverage);
    out += ',';
    out += std::to_string(r.n_runs);
    out += '\n';
  }
  return out;
}

}  // namespace plgrim
