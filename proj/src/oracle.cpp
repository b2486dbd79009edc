#include "dgap/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "dgap/actions.hpp"
#include "dgap/errors.hpp"
#include "dgap/model.hpp"
#include "dgap/potential.hpp"

namespace dgap {
namespace {

struct JointScan {
  std::vector<SatelliteId> sat_ids;
  std::vector<GridId> grid_ids;
  std::vector<double> beta;
  std::vector<ActionSpace> spaces;
  // per satellite, per action: (grid slot, alpha * minutes) contributions
  std::vector<std::vector<std::vector<std::pair<int, double>>>> contrib;

  explicit JointScan(const StageState& stage, std::size_t action_cap) {
    std::map<GridId, int> grid_index;
    for (const auto& [grid, b] : stage.beta) {
      grid_index[grid] = static_cast<int>(grid_ids.size());
      grid_ids.push_back(grid);
      beta.push_back(b);
    }
    for (const auto& [sat, grids] : stage.visible_grids) {
      sat_ids.push_back(sat);
      spaces.push_back(enumerate_actions(stage, sat, action_cap));
      std::vector<std::vector<std::pair<int, double>>> per_action;
      per_action.reserve(spaces.back().actions.size());
      for (const Action& a : spaces.back().actions) {
        std::vector<std::pair<int, double>> c;
        c.reserve(a.allocation.size());
        for (const auto& [grid, x] : a.allocation)
          c.emplace_back(grid_index.at(grid), stage.alpha.at({sat, grid}) * x);
        per_action.push_back(std::move(c));
      }
      contrib.push_back(std::move(per_action));
    }
  }

  double size() const {
    double total = 1.0;
    for (const auto& s : spaces) total *= static_cast<double>(s.actions.size());
    return total;
  }

  AllocationFile materialize(const std::vector<std::size_t>& idx) const {
    AllocationFile file;
    for (std::size_t i = 0; i < sat_ids.size(); ++i)
      file.actions[sat_ids[i]] = spaces[i].actions[idx[i]];
    return file;
  }

  // Lexicographic odometer over joint profiles, rightmost index fastest.
  template <typename Eval>
  OracleReport scan(Eval&& value_of) const {
    const auto start = std::chrono::steady_clock::now();
    OracleReport report;
    report.joint_space_size = size();

    std::vector<std::size_t> idx(spaces.size(), 0);
    std::vector<double> service(grid_ids.size(), 0.0);
    report.optimum = std::numeric_limits<double>::infinity();
    for (;;) {
      std::fill(service.begin(), service.end(), 0.0);
      for (std::size_t i = 0; i < idx.size(); ++i)
        for (const auto& [slot, amount] : contrib[i][idx[i]]) service[slot] += amount;
      const double value = value_of(service);
      if (value < report.optimum) {
        report.optimum = value;
        report.optimal_profiles.clear();
        report.optimal_profiles.push_back(materialize(idx));
        report.optimal_count = 1;
      } else if (value == report.optimum) {
        ++report.optimal_count;
        if (report.optimal_profiles.size() < kOptimalProfileCap)
          report.optimal_profiles.push_back(materialize(idx));
      }
      // advance the odometer
      std::size_t pos = idx.size();
      while (pos > 0) {
        --pos;
        if (++idx[pos] < spaces[pos].actions.size()) break;
        idx[pos] = 0;
        if (pos == 0) {
          report.elapsed_seconds =
              std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
          return report;
        }
      }
    }
  }
};

void require_within_cap(const JointScan& scan, double cap) {
  if (scan.size() > cap)
    throw CapacityError("joint action space of " + std::to_string(scan.size()) +
                        " profiles exceeds the cap of " + std::to_string(cap) +
                        "; refusing to approximate");
}

}  // namespace

double joint_space_size(const StageState& stage, std::size_t action_cap) {
  double total = 1.0;
  for (const auto& [sat, grids] : stage.visible_grids)
    total *= static_cast<double>(enumerate_actions(stage, sat, action_cap).actions.size());
  return total;
}

OracleReport brute_force_optimum(const StageState& stage, double cap) {
  JointScan scan(stage, kDefaultActionCap);
  require_within_cap(scan, cap);
  const auto& beta = scan.beta;
  return scan.scan([&beta](const std::vector<double>& service) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < beta.size(); ++j)
      worst = std::max(worst, beta[j] - service[j]);
    return worst;
  });
}

OracleReport brute_force_smooth_optimum(const StageState& stage, double eps, double cap) {
  if (!(eps > 0.0)) throw ValidationError("smoothing epsilon must be positive");
  JointScan scan(stage, kDefaultActionCap);
  require_within_cap(scan, cap);
  const auto& beta = scan.beta;
  return scan.scan([&beta, eps](const std::vector<double>& service) {
    double y_max = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < beta.size(); ++j)
      y_max = std::max(y_max, beta[j] - service[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < beta.size(); ++j)
      sum += std::exp((beta[j] - service[j] - y_max) / eps);
    return y_max + eps * std::log(sum);
  });
}

bool is_nash_equilibrium(const StageState& stage, const AllocationFile& a, double eps,
                         std::size_t action_cap) {
  validate_allocation(stage, a);
  for (const auto& [sat, grids] : stage.visible_grids) {
    if (grids.empty()) continue;
    const ActionSpace space = enumerate_actions(stage, sat, action_cap);
    const LocalUtilityEvaluator evaluator(stage, a, sat, eps);
    const double incumbent = evaluator.utility(a.actions.at(sat));
    for (const Action& candidate : space.actions) {
      if (evaluator.utility(candidate) > incumbent + kBetterReplyTolerance) return false;
    }
  }
  return true;
}

double check_exact_potential(const StageState& stage, double eps, int samples,
                             RandomSource& rng) {
  std::vector<SatelliteId> sat_ids;
  std::vector<ActionSpace> spaces;
  for (const auto& [sat, grids] : stage.visible_grids) {
    sat_ids.push_back(sat);
    spaces.push_back(enumerate_actions(stage, sat));
  }
  const std::size_t n = sat_ids.size();
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const std::size_t i = static_cast<std::size_t>(rng.below(n));
    AllocationFile base;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t pick = static_cast<std::size_t>(rng.below(spaces[k].actions.size()));
      base.actions[sat_ids[k]] = spaces[k].actions[pick];
    }
    const Action& first = spaces[i].actions[rng.below(spaces[i].actions.size())];
    const Action& second = spaces[i].actions[rng.below(spaces[i].actions.size())];

    AllocationFile with_first = base;
    with_first.actions[sat_ids[i]] = first;
    AllocationFile with_second = base;
    with_second.actions[sat_ids[i]] = second;

    const double du = local_utility(stage, with_first, sat_ids[i], eps) -
                      local_utility(stage, with_second, sat_ids[i], eps);
    const double phi_first = potential(stage, with_first, eps);
    const double phi_second = potential(stage, with_second, eps);
    const double dphi = phi_first - phi_second;
    const double denom = std::max({1.0, std::abs(phi_first), std::abs(phi_second),
                                   std::abs(du), std::abs(dphi)});
    worst = std::max(worst, std::abs(du - dphi) / denom);
  }
  return worst;
}

SandwichBound sandwich_bound_check(const StageState& stage, const AllocationFile& a,
                                   double eps) {
  SandwichBound bound;
  bound.lower = objective(stage, a);
  bound.middle = smooth_objective(stage, a, eps);
  bound.upper = bound.lower + eps * std::log(static_cast<double>(stage.beta.size()));
  return bound;
}

}  // namespace dgap
