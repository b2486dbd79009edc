#include "dgap/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dgap/errors.hpp"
#include "dgap/model.hpp"

namespace dgap {
namespace {

void require_positive_eps(double eps) {
  if (!(eps > 0.0)) throw ValidationError("smoothing epsilon must be positive");
}

// Alpha-weighted service per grid. Satellites are accumulated in ascending
// id order so independent evaluation paths produce bit-identical sums.
std::map<GridId, double> service_by_grid(const StageState& stage, const AllocationFile& a) {
  std::map<GridId, double> service;
  for (const auto& [grid, beta] : stage.beta) service[grid] = 0.0;
  for (const auto& [sat, action] : a.actions) {
    for (const auto& [grid, x] : action.allocation) {
      auto alpha_it = stage.alpha.find({sat, grid});
      if (alpha_it == stage.alpha.end())
        throw ValidationError("profile allocates invisible pair (satellite " +
                              std::to_string(sat) + ", grid " + std::to_string(grid) + ")");
      service[grid] += alpha_it->second * x;
    }
  }
  return service;
}

}  // namespace

double smooth_objective(const StageState& stage, const AllocationFile& a, double eps) {
  require_positive_eps(eps);
  if (stage.beta.empty()) throw ValidationError("smooth_objective: stage has no grids");
  validate_allocation(stage, a);
  const auto service = service_by_grid(stage, a);
  double y_max = -std::numeric_limits<double>::infinity();
  for (const auto& [grid, beta] : stage.beta)
    y_max = std::max(y_max, beta - service.at(grid));
  double sum = 0.0;
  for (const auto& [grid, beta] : stage.beta)
    sum += std::exp((beta - service.at(grid) - y_max) / eps);
  return y_max + eps * std::log(sum);
}

double global_utility(const StageState& stage, const AllocationFile& a, double eps) {
  return -std::exp(smooth_objective(stage, a, eps) / eps);
}

Normalizer normalizer(const StageState& stage, double eps) {
  require_positive_eps(eps);
  if (stage.alpha.empty())
    throw ValidationError("normalizer: degenerate stage with no visible pair");
  Normalizer p;
  p.budget = stage.length;
  p.alpha_max = 0.0;
  for (const auto& [pair, alpha] : stage.alpha) p.alpha_max = std::max(p.alpha_max, alpha);
  p.beta_max = -std::numeric_limits<double>::infinity();
  for (const auto& [grid, beta] : stage.beta) p.beta_max = std::max(p.beta_max, beta);

  p.n_max = 0;
  const Minutes per_grid = 1 + stage.transition_constant;
  for (const auto& [sat, grids] : stage.visible_grids) {
    if (grids.empty()) continue;
    auto eta_it = stage.eta.find(sat);
    const Minutes budget = stage.length - (eta_it == stage.eta.end() ? 0 : eta_it->second);
    if (budget < per_grid) continue;
    const int by_time = budget / per_grid;
    p.n_max = std::max(p.n_max, std::min<int>(by_time, static_cast<int>(grids.size())));
  }

  const int n_eff = std::max(p.n_max, 1);
  const double depletion = -std::expm1(-static_cast<double>(p.budget) * p.alpha_max / eps);
  p.scale = n_eff * depletion;
  p.value = p.scale * std::exp(p.beta_max / eps);
  p.log_value = std::log(static_cast<double>(n_eff)) + std::log(depletion) + p.beta_max / eps;
  return p;
}

LocalUtilityEvaluator::LocalUtilityEvaluator(const StageState& stage,
                                             const AllocationFile& a, SatelliteId self,
                                             double eps)
    : eps_(eps) {
  const Normalizer p = normalizer(stage, eps);
  scale_ = p.scale;
  auto vis_it = stage.visible_grids.find(self);
  if (vis_it == stage.visible_grids.end())
    throw ValidationError("local utility: unknown satellite " + std::to_string(self));
  auto service = service_by_grid(stage, a);
  auto self_it = a.actions.find(self);
  if (self_it != a.actions.end()) {
    for (const auto& [grid, x] : self_it->second.allocation)
      service[grid] -= stage.alpha.at({self, grid}) * x;
  }
  for (GridId grid : vis_it->second) {
    const double alpha = stage.alpha.at({self, grid});
    exp_y_[grid] = std::exp((stage.beta.at(grid) - service.at(grid) - p.beta_max) / eps);
    alpha_[grid] = alpha;
  }
}

double LocalUtilityEvaluator::utility(const Action& candidate) const {
  double sum = 0.0;
  for (const auto& [grid, x] : candidate.allocation) {
    auto it = exp_y_.find(grid);
    if (it == exp_y_.end())
      throw ValidationError("candidate action allocates invisible grid " +
                            std::to_string(grid));
    sum += it->second * (1.0 - std::exp(-static_cast<double>(x) * alpha_.at(grid) / eps_));
  }
  return sum / scale_;
}

double marginal_contribution(const StageState& stage, const AllocationFile& a,
                             SatelliteId sat, double eps) {
  require_positive_eps(eps);
  auto self_it = a.actions.find(sat);
  if (self_it == a.actions.end())
    throw ValidationError("marginal_contribution: unknown satellite " + std::to_string(sat));
  auto service = service_by_grid(stage, a);
  double sum = 0.0;
  for (const auto& [grid, x] : self_it->second.allocation) {
    const double alpha = stage.alpha.at({sat, grid});
    const double own = alpha * x;
    const double others = service.at(grid) - own;
    sum += std::exp((stage.beta.at(grid) - others) / eps) *
           (1.0 - std::exp(-own / eps));
  }
  return sum;
}

double local_utility(const StageState& stage, const AllocationFile& a, SatelliteId sat,
                     double eps) {
  auto self_it = a.actions.find(sat);
  if (self_it == a.actions.end())
    throw ValidationError("local_utility: unknown satellite " + std::to_string(sat));
  return LocalUtilityEvaluator(stage, a, sat, eps).utility(self_it->second);
}

double potential(const StageState& stage, const AllocationFile& a, double eps) {
  const Normalizer p = normalizer(stage, eps);
  validate_allocation(stage, a);
  const auto service = service_by_grid(stage, a);
  double sum = 0.0;
  for (const auto& [grid, beta] : stage.beta)
    sum += std::exp((beta - service.at(grid) - p.beta_max) / eps);
  return -sum / p.scale;
}

}  // namespace dgap
