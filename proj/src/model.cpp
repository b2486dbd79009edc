#include "dgap/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "dgap/errors.hpp"

namespace dgap {

const double* Scenario::capacity_at(SatelliteId sat, GridId grid, int stage) const {
  auto it = capacity.find({sat, grid, stage});
  if (it == capacity.end()) it = capacity.find({sat, grid, kAllStages});
  return it == capacity.end() ? nullptr : &it->second;
}

const double* Scenario::load_at(GridId grid, int stage) const {
  auto it = load.find({grid, stage});
  if (it == load.end()) it = load.find({grid, kAllStages});
  return it == load.end() ? nullptr : &it->second;
}

std::vector<SatelliteId> StageState::satellite_ids() const {
  std::vector<SatelliteId> out;
  out.reserve(visible_grids.size());
  for (const auto& [sat, grids] : visible_grids) out.push_back(sat);
  return out;
}

std::vector<GridId> StageState::grid_ids() const {
  std::vector<GridId> out;
  out.reserve(beta.size());
  for (const auto& [grid, b] : beta) out.push_back(grid);
  return out;
}

Minutes Action::total_minutes() const {
  Minutes total = 0;
  for (const auto& [grid, x] : allocation) total += x;
  return total;
}

std::set<GridId> Action::support() const {
  std::set<GridId> out;
  for (const auto& [grid, x] : allocation) out.insert(grid);
  return out;
}

std::map<SatelliteId, std::set<GridId>> visible_grids(
    const std::vector<TimeWindow>& windows, Minutes t_k, Minutes dt) {
  if (dt < 1) throw ValidationError("visible_grids: dt must be >= 1");
  std::map<SatelliteId, std::set<GridId>> out;
  for (const TimeWindow& w : windows) {
    if (w.begin <= t_k && w.end >= t_k + dt) out[w.sat].insert(w.grid);
  }
  return out;
}

double remaining_load(const StageState& stage, const AllocationFile& a, GridId grid) {
  auto beta_it = stage.beta.find(grid);
  if (beta_it == stage.beta.end())
    throw ValidationError("remaining_load: unknown grid " + std::to_string(grid));
  double served = 0.0;
  for (const auto& [sat, action] : a.actions) {
    auto x_it = action.allocation.find(grid);
    if (x_it == action.allocation.end()) continue;
    auto alpha_it = stage.alpha.find({sat, grid});
    if (alpha_it == stage.alpha.end())
      throw ValidationError("remaining_load: satellite " + std::to_string(sat) +
                            " allocates grid " + std::to_string(grid) +
                            " without a visible capacity entry");
    served += alpha_it->second * x_it->second;
  }
  return beta_it->second - served;
}

Minutes imaging_transition_time(const Action& action, Minutes transition_constant) {
  return static_cast<Minutes>(action.allocation.size()) * transition_constant;
}

Minutes payload_transfer_time(const std::set<GridId>& prev_grids,
                              const std::set<GridId>& curr_grids,
                              Minutes transfer_penalty) {
  if (prev_grids.empty()) return 0;
  for (GridId g : prev_grids)
    if (curr_grids.count(g)) return 0;
  return transfer_penalty;
}

bool is_feasible_action(const StageState& stage, const Action& action) {
  auto vis_it = stage.visible_grids.find(action.owner);
  if (vis_it == stage.visible_grids.end())
    throw ValidationError("is_feasible_action: unknown satellite " +
                          std::to_string(action.owner));
  Minutes total = 0;
  for (const auto& [grid, x] : action.allocation) {
    if (x < 1) return false;
    if (!vis_it->second.count(grid)) return false;
    total += x;
  }
  const Minutes rho = imaging_transition_time(action, stage.transition_constant);
  auto eta_it = stage.eta.find(action.owner);
  const Minutes eta = eta_it == stage.eta.end() ? 0 : eta_it->second;
  return total + rho + eta <= stage.length;
}

void validate_allocation(const StageState& stage, const AllocationFile& a) {
  if (a.actions.size() != stage.visible_grids.size())
    throw ValidationError("allocation file must carry exactly one action per satellite (" +
                          std::to_string(stage.visible_grids.size()) + " expected, " +
                          std::to_string(a.actions.size()) + " given)");
  for (const auto& [sat, action] : a.actions) {
    if (!stage.visible_grids.count(sat))
      throw ValidationError("allocation file names unknown satellite " + std::to_string(sat));
    if (action.owner != sat)
      throw ValidationError("action stored under satellite " + std::to_string(sat) +
                            " is owned by " + std::to_string(action.owner));
    if (!is_feasible_action(stage, action))
      throw ValidationError("infeasible action for satellite " + std::to_string(sat));
  }
}

double objective(const StageState& stage, const AllocationFile& a) {
  if (stage.beta.empty()) throw ValidationError("objective: stage has no grids");
  validate_allocation(stage, a);
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& [grid, beta] : stage.beta)
    worst = std::max(worst, remaining_load(stage, a, grid));
  return worst;
}

AllocationFile all_null_file(const StageState& stage) {
  AllocationFile file;
  for (const auto& [sat, grids] : stage.visible_grids) file.actions[sat] = Action{sat, {}};
  return file;
}

void validate_scenario(const Scenario& s) {
  if (s.satellites.empty()) throw ValidationError("scenario: needs at least one satellite");
  if (s.grids.empty()) throw ValidationError("scenario: needs at least one grid");
  std::set<SatelliteId> sats(s.satellites.begin(), s.satellites.end());
  std::set<GridId> grids(s.grids.begin(), s.grids.end());
  if (sats.size() != s.satellites.size())
    throw ValidationError("scenario: duplicate satellite ids");
  if (grids.size() != s.grids.size()) throw ValidationError("scenario: duplicate grid ids");
  if (s.stage_length < 1) throw ValidationError("scenario: dt must be >= 1");
  if (s.transition_constant < 0) throw ValidationError("scenario: C must be >= 0");
  if (s.transfer_penalty < 0) throw ValidationError("scenario: H must be >= 0");
  if (s.horizon_end <= s.horizon_begin)
    throw ValidationError("scenario: horizon must be a nonempty interval");

  for (std::size_t k = 0; k < s.windows.size(); ++k) {
    const TimeWindow& w = s.windows[k];
    const std::string where = "windows[" + std::to_string(k) + "]";
    if (!sats.count(w.sat))
      throw ValidationError(where + ": unknown satellite " + std::to_string(w.sat));
    if (!grids.count(w.grid))
      throw ValidationError(where + ": unknown grid " + std::to_string(w.grid));
    if (w.begin >= w.end)
      throw ValidationError(where + ": window begin must precede end (satellite " +
                            std::to_string(w.sat) + ", grid " + std::to_string(w.grid) + ")");
    if (w.begin < s.horizon_begin || w.end > s.horizon_end)
      throw ValidationError(where + ": window must lie within the horizon");
  }
  for (const auto& [key, alpha] : s.capacity) {
    const auto& [sat, grid, stage] = key;
    const std::string where = "capacity(sat " + std::to_string(sat) + ", grid " +
                              std::to_string(grid) + ", stage " + std::to_string(stage) + ")";
    if (!sats.count(sat)) throw ValidationError(where + ": unknown satellite");
    if (!grids.count(grid)) throw ValidationError(where + ": unknown grid");
    if (stage < 0) throw ValidationError(where + ": stage must be >= 0");
    if (!(alpha > 0.0)) throw ValidationError(where + ": alpha must be > 0");
  }
  for (const auto& [key, beta] : s.load) {
    const auto& [grid, stage] = key;
    const std::string where =
        "load(grid " + std::to_string(grid) + ", stage " + std::to_string(stage) + ")";
    if (!grids.count(grid)) throw ValidationError(where + ": unknown grid");
    if (stage < 0) throw ValidationError(where + ": stage must be >= 0");
    if (beta < 0.0) throw ValidationError(where + ": beta must be >= 0");
  }
}

}  // namespace dgap
