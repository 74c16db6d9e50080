#include "plgrim/params.hpp"

#include <array>
#include <charconv>
#include <functional>
#include <sstream>
#include <variant>

namespace plgrim {
namespace {

struct Entry {
  std::string_view key;
  std::function<std::variant<double*, int*>(Params&)> ref;
};

#define PLGRIM_PARAM(module, field) \
  Entry { #module "." #field, [](Params& p) -> std::variant<double*, int*> { return &p.module.field; } }

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = {
      PLGRIM_PARAM(grid, cell_size),      PLGRIM_PARAM(grid, r_sense),
      PLGRIM_PARAM(grid, speed),          PLGRIM_PARAM(risk, alpha),
      PLGRIM_PARAM(risk, r_max),          PLGRIM_PARAM(risk, d0),
      PLGRIM_PARAM(risk, tau),            PLGRIM_PARAM(risk, sigma_prior),
      PLGRIM_PARAM(risk, sigma_min),      PLGRIM_PARAM(risk, sigma_meas),
      PLGRIM_PARAM(risk, prior_mean),     PLGRIM_PARAM(risk, lambda_risk),
      PLGRIM_PARAM(irm, d_bc),            PLGRIM_PARAM(irm, r_connect),
      PLGRIM_PARAM(irm, min_frontier_size), PLGRIM_PARAM(irm, local_radius),
      PLGRIM_PARAM(gcp, gamma),           PLGRIM_PARAM(gcp, lambda_c),
      PLGRIM_PARAM(gcp, eps_vi),          PLGRIM_PARAM(gcp, mu_f),
      PLGRIM_PARAM(gcp, max_sweeps),      PLGRIM_PARAM(lcp, macro_len),
      PLGRIM_PARAM(lcp, depth),           PLGRIM_PARAM(lcp, gamma),
      PLGRIM_PARAM(lcp, ucb_c),           PLGRIM_PARAM(lcp, lambda_i),
      PLGRIM_PARAM(lcp, lambda_c),        PLGRIM_PARAM(lcp, lambda_goal),
      PLGRIM_PARAM(lcp, p_occ),           PLGRIM_PARAM(lcp, budget),
      PLGRIM_PARAM(lcp, threads),         PLGRIM_PARAM(plgrim, k_replan),
      PLGRIM_PARAM(plgrim, eps_tie),      PLGRIM_PARAM(plgrim, f_recover),
      PLGRIM_PARAM(plgrim, t_blacklist),  PLGRIM_PARAM(plgrim, raise_factor),
      PLGRIM_PARAM(nbv, n_samples),       PLGRIM_PARAM(nbv, r_view),
      PLGRIM_PARAM(hfe, r_local),         PLGRIM_PARAM(harness, time_step),
  };
  return entries;
}

#undef PLGRIM_PARAM

const Entry& find(std::string_view key) {
  for (const auto& e : registry())
    if (e.key == key) return e;
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& e : registry()) keys.emplace_back(e.key);
  return keys;
}

void set_param(Params& p, std::string_view key, std::string_view value) {
  value = trim(value);
  const auto& e = find(key);
  const auto bad = [&] {
    return ConfigError("invalid value '" + std::string(value) + "' for '" + std::string(key) + "'");
  };
  std::visit(
      [&](auto* slot) {
        using T = std::remove_pointer_t<decltype(slot)>;
        T parsed{};
        auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), parsed);
        if (ec != std::errc{} || ptr != value.data() + value.size()) throw bad();
        *slot = parsed;
      },
      e.ref(p));
}

std::string get_param(const Params& p, std::string_view key) {
  auto& mut = const_cast<Params&>(p);
  return std::visit(
      [](auto* slot) -> std::string {
        if constexpr (std::is_same_v<decltype(slot), double*>)
          return format_double(*slot);
        else
          return std::to_string(*slot);
      },
      find(key).ref(mut));
}

void apply_config_text(Params& p, std::string_view text) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    set_param(p, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

std::string dump_config(const Params& p) {
  std::ostringstream os;
  std::string_view module;
  for (const auto& e : registry()) {
    const auto m = e.key.substr(0, e.key.find('.'));
    if (m != module) {
      if (!module.empty()) os << '\n';
      os << "# module: " << m << '\n';
      module = m;
    }
    os << e.key << " = " << get_param(p, e.key) << '\n';
  }
  return os.str();
}

}  // namespace plgrim
