#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace plgrim {

/// Execution policy for kernels that have a serial reference and an OpenMP
/// variant. Both produce identical results.
enum class Exec { Serial, Parallel };

struct GridParams {
  double cell_size = 0.5;  // m
  double r_sense = 4.0;    // m
  double speed = 1.0;      // m/s
};

struct RiskParams {
  double alpha = 0.9;
  double r_max = 0.6;
  double d0 = 4.0;     // m, distance decay of measurement weight
  double tau = 50.0;   // steps, age decay of stored confidence
  double sigma_prior = 0.3;
  double sigma_min = 0.02;
  double sigma_meas = 0.1;  // per-measurement noise at unit weight
  double prior_mean = 0.5;
  double lambda_risk = 1.0;
};

struct IrmParams {
  double d_bc = 2.0;       // m between breadcrumbs
  double r_connect = 6.0;  // m
  int min_frontier_size = 1;
  int local_radius = 16;   // cells
};

struct GcpParams {
  double gamma = 0.95;     // per meter
  double lambda_c = 0.05;  // per meter
  double eps_vi = 1e-6;
  double mu_f = 1.0;       // bits per frontier cell
  int max_sweeps = 10000;
};

struct LcpParams {
  int macro_len = 4;
  int depth = 3;
  double gamma = 0.9;  // per macro action
  double ucb_c = 1.4;
  double lambda_i = 1.0;
  double lambda_c = 0.5;
  double lambda_goal = 0.3;
  double p_occ = 0.2;
  int budget = 2048;
  int threads = 1;  // independent root-parallel trees; 1 = reference mode
};

struct PlgrimParams {
  int k_replan = 4;
  double eps_tie = 0.05;
  int f_recover = 3;
  int t_blacklist = 200;
  double raise_factor = 1.5;
};

struct NbvParams {
  int n_samples = 32;
  double r_view = 8.0;  // m
};

struct HfeParams {
  double r_local = 8.0;  // m
};

struct HarnessParams {
  double time_step = 1.0;  // s, resampling grid for compare
};

/// Every tunable constant, grouped by module of origin.
struct Params {
  GridParams grid;
  RiskParams risk;
  IrmParams irm;
  GcpParams gcp;
  LcpParams lcp;
  PlgrimParams plgrim;
  NbvParams nbv;
  HfeParams hfe;
  HarnessParams harness;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Keys in `module.name` form, in a fixed order.
std::vector<std::string> config_keys();

/// Sets one key from its textual value. Throws ConfigError on an unknown key
/// or an unparsable value.
void set_param(Params& p, std::string_view key, std::string_view value);
std::string get_param(const Params& p, std::string_view key);

/// Applies a flat `key = value` document (`#` starts a comment).
void apply_config_text(Params& p, std::string_view text);

/// Renders every key with its current value; the output is itself a valid
/// config document that reproduces `p` exactly.
std::string dump_config(const Params& p);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace plgrim
