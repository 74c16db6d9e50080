#include "plgrim/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "plgrim/harness.hpp"
#include "plgrim/params.hpp"

namespace plgrim {
namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string map;
  std::string map_gen;
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  int steps = 5000;
  bool parallel = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--map", c.map, "Map file");
  cmd->add_option("--map-gen", c.map_gen, "Generated map: maze:WxH[:dD] or subway:S");
  cmd->add_option("--config", c.config, "Config file (key = value)");
  cmd->add_option("--set", c.sets, "Override one constant, key=value")->take_all();
  cmd->add_option("--steps", c.steps, "Step budget per episode")->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out, "Output CSV path (stdout when omitted)");
  cmd->add_flag("--parallel", c.parallel, "Use the OpenMP kernels");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << text;
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
}

/// defaults < config file < --set flags.
Params resolve_params(const Common& c) {
  Params p;
  if (!c.config.empty()) {
    const std::string text = read_file(c.config);
    try {
      apply_config_text(p, text);
    } catch (const ConfigError& e) {
      throw UsageError(c.config + ": " + e.what());
    }
  }
  for (const auto& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    try {
      set_param(p, kv.substr(0, eq), kv.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    }
  }
  return p;
}

MapSource resolve_map(const Common& c) {
  if (c.map.empty() == c.map_gen.empty()) throw UsageError("exactly one of --map or --map-gen is required");
  if (!c.map.empty()) {
    MapSource src;
    src.kind = MapSource::Kind::File;
    src.path = c.map;
    return src;
  }
  try {
    return parse_map_gen(c.map_gen);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--map-gen: ") + e.what());
  }
}

PlannerId resolve_planner(const std::string& name) {
  if (auto id = parse_planner(name)) return *id;
  throw UsageError("unknown planner '" + name + "' (valid planners: " + planner_names() + ")");
}

std::uint64_t parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty())
    throw UsageError("bad seed '" + std::string(s) + "'");
  return v;
}

/// "A..B" (inclusive) or a comma-separated list.
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const auto lo = parse_u64(std::string_view(text).substr(0, dots));
    const auto hi = parse_u64(std::string_view(text).substr(dots + 2));
    if (hi < lo) throw UsageError("empty seed range '" + text + "'");
    for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
  }
  std::string_view rest = text;
  for (;;) {
    const auto comma = rest.find(',');
    seeds.push_back(parse_u64(rest.substr(0, comma)));
    if (comma == std::string_view::npos) return seeds;
    rest.remove_prefix(comma + 1);
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coverage planning simulator"};
  app.require_subcommand(1);

  Common run_opts;
  std::string planner = "plgrim";
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "Run one episode and write its metrics CSV");
  add_common(run, run_opts);
  run->add_option("--planner", planner, "plgrim, nbv or hfe");
  run->add_option("--seed", seed, "Episode seed");

  Common cmp_opts;
  std::string planners = "plgrim,nbv,hfe";
  std::string seeds_text = "1";
  auto* cmp = app.add_subcommand("compare", "Aggregate coverage-vs-time over planners and seeds");
  add_common(cmp, cmp_opts);
  cmp->add_option("--planners", planners, "Comma-separated planner list");
  cmp->add_option("--seeds", seeds_text, "Seeds as A..B or a comma list");

  std::string kind = "maze";
  int w = 41, h = 41, scale = 1;
  std::uint64_t gen_seed = 0;
  double hazard = 0.0;
  std::string gen_out;
  auto* gen = app.add_subcommand("genmap", "Write a generated map");
  gen->set_help_flag("--help", "Print this help message and exit");  // frees -h for --h
  gen->add_option("--kind", kind, "maze or subway")->check(CLI::IsMember({"maze", "subway"}));
  gen->add_option("--w", w, "Maze width (odd)");
  gen->add_option("--h", h, "Maze height (odd)");
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--hazard", hazard, "Fraction of hazardous free cells");
  gen->add_option("--scale", scale, "Subway scale");
  gen->add_option("--out", gen_out, "Output path (stdout when omitted)");

  std::string defaults_out;
  auto* defaults = app.add_subcommand("defaults", "Print every constant as a config file");
  defaults->add_option("--out", defaults_out, "Output path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      EpisodeConfig cfg;
      cfg.planner = resolve_planner(planner);
      cfg.map = resolve_map(run_opts);
      cfg.params = resolve_params(run_opts);
      cfg.seed = seed;
      cfg.max_steps = run_opts.steps;
      cfg.exec = run_opts.parallel ? Exec::Parallel : Exec::Serial;
      const Metrics m = run_episode(cfg);
      write_output(run_opts.out, metrics_csv(m), out);
      std::ostream& log = run_opts.out.empty() ? err : out;
      log << "planner=" << planner << " end=" << m.end_reason << " final_coverage=" << format_double(m.final_coverage)
          << " steps_to_90=" << m.steps_to_90 << " distance_m=" << format_double(m.total_distance) << '\n';
      if (m.end_reason.rfind("error", 0) == 0) {
        err << m.end_reason << '\n';
        return 2;
      }
      return 0;
    }
    if (*cmp) {
      std::vector<EpisodeConfig> cfgs;
      const MapSource map = resolve_map(cmp_opts);
      const Params params = resolve_params(cmp_opts);
      std::string_view rest = planners;
      for (;;) {
        const auto comma = rest.find(',');
        EpisodeConfig cfg;
        cfg.planner = resolve_planner(std::string(rest.substr(0, comma)));
        cfg.map = map;
        cfg.params = params;
        cfg.max_steps = cmp_opts.steps;
        cfgs.push_back(cfg);
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
      }
      const auto seeds = parse_seeds(seeds_text);
      const auto rows = compare(cfgs, seeds, cmp_opts.parallel ? Exec::Parallel : Exec::Serial);
      write_output(cmp_opts.out, comparison_csv(rows), out);
      return 0;
    }
    if (*gen) {
      const GridMap map = kind == "maze" ? generate_maze(w, h, gen_seed, hazard) : generate_subway(scale, gen_seed);
      write_output(gen_out, map.to_text(), out);
      return 0;
    }
    if (*defaults) {
      write_output(defaults_out, dump_config(Params{}), out);
      return 0;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace plgrim
