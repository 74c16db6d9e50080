#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "plgrim/cell.hpp"
#include "plgrim/grid_map.hpp"
#include "plgrim/params.hpp"

namespace plgrim {

class RiskError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Per-cell Gaussian belief over the traversal hazard.
struct RiskEstimate {
  double mean = 0.5;
  double sigma = 0.3;
  double confidence = 0.0;
  int last_update = 0;  // step index of the last fused measurement
};

/// Mean of the worst ceil((1 - alpha) * n) samples.
double cvar_samples(std::span<const double> samples, double alpha);

/// Closed-form CVaR of N(mean, sigma^2): mean + sigma * pdf(z_alpha) / (1 - alpha).
double cvar_gaussian(double mean, double sigma, double alpha);

/// Fused single-channel CVaR cost map.
class RiskMap {
 public:
  RiskMap() = default;
  RiskMap(int width, int height, const RiskParams& params);

  int width() const { return width_; }
  int height() const { return height_; }
  const RiskParams& params() const { return params_; }
  double alpha() const { return params_.alpha; }
  double r_max() const { return params_.r_max; }

  const RiskEstimate& at(Cell c) const { return cells_[index(c)]; }
  void set_estimate(Cell c, const RiskEstimate& e);

  /// CVaR_alpha of the cell's estimate. Cached; refreshed on every update.
  double cvar(Cell c) const { return cvar_[index(c)]; }
  bool traversable(Cell c) const { return cvar(c) <= params_.r_max; }

  /// Restores the prior estimate for one cell.
  void reset(Cell c);

  /// Fuses one measurement of hazard `h` taken from `distance_m` at `time`.
  void fuse(Cell c, double h, double distance_m, int time);

  void set_r_max(double r_max) { params_.r_max = r_max; }

 private:
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * width_ + c.x; }
  void refresh(std::size_t i);

  int width_ = 0;
  int height_ = 0;
  RiskParams params_;
  double tail_factor_ = 0.0;  // CVaR of N(0, 1) at alpha
  std::vector<RiskEstimate> cells_;
  std::vector<double> cvar_;
};

/// Fuses every sensed Free cell of `obs`, weighting each measurement by
/// exp(-d/d0) and decaying the stored confidence by exp(-age/tau).
RiskMap update_risk(RiskMap map, const Observation& obs, Cell robot, int time, double cell_size);
void update_risk_in_place(RiskMap& map, const Observation& obs, Cell robot, int time, double cell_size);

/// Risk-weighted length (m) of the move a->b, or nullopt when either endpoint
/// CVaR exceeds r_max.
std::optional<double> edge_risk_cost(const RiskMap& map, Cell a, Cell b, double cell_size);

RiskMap raise_risk_threshold(RiskMap map, double factor);

}  // namespace plgrim
