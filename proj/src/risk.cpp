#include "plgrim/risk.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

namespace plgrim {
namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw RiskError("alpha must lie strictly in (0, 1)");
}

}  // namespace

double cvar_samples(std::span<const double> samples, double alpha) {
  if (samples.empty()) throw RiskError("cvar_samples: empty sample list");
  check_alpha(alpha);
  const auto n = samples.size();
  // The tolerance keeps (1 - 0.7) * 10 at a tail of 3, not 4.
  auto k = static_cast<std::size_t>(std::ceil((1.0 - alpha) * static_cast<double>(n) - 1e-9));
  k = std::clamp<std::size_t>(k, 1, n);
  std::vector<double> sorted(samples.begin(), samples.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end(),
                   std::greater<>());
  std::sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k), std::greater<>());
  const double tail = std::accumulate(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k), 0.0);
  return tail / static_cast<double>(k);
}

double cvar_gaussian(double mean, double sigma, double alpha) {
  if (sigma < 0.0) throw RiskError("cvar_gaussian: negative sigma");
  check_alpha(alpha);
  if (sigma == 0.0) return mean;
  const boost::math::normal_distribution<double> standard;
  const double z = boost::math::quantile(standard, alpha);
  return mean + sigma * boost::math::pdf(standard, z) / (1.0 - alpha);
}

RiskMap::RiskMap(int width, int height, const RiskParams& params)
    : width_(width), height_(height), params_(params) {
  check_alpha(params.alpha);
  if (params.r_max < 0.0) throw RiskError("r_max must be non-negative");
  const auto n = static_cast<std::size_t>(width) * height;
  cells_.assign(n, RiskEstimate{params.prior_mean, params.sigma_prior, 0.0, 0});
  tail_factor_ = cvar_gaussian(0.0, 1.0, params.alpha);
  cvar_.assign(n, params.prior_mean + params.sigma_prior * tail_factor_);
}

void RiskMap::refresh(std::size_t i) { cvar_[i] = cells_[i].mean + cells_[i].sigma * tail_factor_; }

void RiskMap::set_estimate(Cell c, const RiskEstimate& e) {
  const auto i = index(c);
  cells_[i] = e;
  refresh(i);
}

void RiskMap::reset(Cell c) {
  const auto i = index(c);
  cells_[i] = RiskEstimate{params_.prior_mean, params_.sigma_prior, 0.0, 0};
  refresh(i);
}

void RiskMap::fuse(Cell c, double h, double distance_m, int time) {
  const auto i = index(c);
  auto& e = cells_[i];
  const double age = std::max(0, time - e.last_update);
  const double kept = e.confidence * std::exp(-age / params_.tau);
  const double w = std::exp(-distance_m / params_.d0);
  e.mean = (kept * e.mean + w * h) / (kept + w);
  e.confidence = kept + w;
  // Precision adds up: the prior contributes 1/sigma_prior^2, each unit of
  // confidence 1/sigma_meas^2.
  const double precision = 1.0 / (params_.sigma_prior * params_.sigma_prior) +
                           e.confidence / (params_.sigma_meas * params_.sigma_meas);
  e.sigma = std::max(params_.sigma_min, std::sqrt(1.0 / precision));
  e.last_update = time;
  refresh(i);
}

void update_risk_in_place(RiskMap& map, const Observation& obs, Cell robot, int time, double cell_size) {
  for (const auto& s : obs.sensed) {
    if (s.occupancy != Occupancy::Free) continue;
    map.fuse(s.cell, s.hazard, euclid_cells(s.cell, robot) * cell_size, time);
  }
}

RiskMap update_risk(RiskMap map, const Observation& obs, Cell robot, int time, double cell_size) {
  update_risk_in_place(map, obs, robot, time, cell_size);
  return map;
}

std::optional<double> edge_risk_cost(const RiskMap& map, Cell a, Cell b, double cell_size) {
  if (!adjacent8(a, b)) throw RiskError("edge_risk_cost: cells are not adjacent");
  const double ca = map.cvar(a);
  const double cb = map.cvar(b);
  if (std::max(ca, cb) > map.r_max()) return std::nullopt;
  const double length = move_length_cells(a, b) * cell_size;
  return length * (1.0 + map.params().lambda_risk * 0.5 * (ca + cb));
}

RiskMap raise_risk_threshold(RiskMap map, double factor) {
  if (!(factor > 1.0)) throw RiskError("raise_risk_threshold: factor must exceed 1");
  map.set_r_max(map.r_max() * factor);
  return map;
}

}  // namespace plgrim
