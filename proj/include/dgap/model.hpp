#pragma once

#include "dgap/types.hpp"

namespace dgap {

/// Grids visible per satellite on the stage [t_k, t_k + dt]: a window
/// qualifies iff it covers the whole stage (begin <= t_k and end >= t_k + dt).
/// Satellites with no qualifying window are omitted from the result.
std::map<SatelliteId, std::set<GridId>> visible_grids(
    const std::vector<TimeWindow>& windows, Minutes t_k, Minutes dt);

/// y_j: beta_j minus the alpha-weighted service the profile delivers to
/// `grid`. Negative means over-service, which is legal and not clamped.
double remaining_load(const StageState& stage, const AllocationFile& a, GridId grid);

/// rho_i: per-grid imaging setup charge, |support| * C.
Minutes imaging_transition_time(const Action& action, Minutes transition_constant);

/// eta: H when the previous stage's allocated set is nonempty and disjoint
/// from the current one, else 0. An idle previous stage costs nothing.
Minutes payload_transfer_time(const std::set<GridId>& prev_grids,
                              const std::set<GridId>& curr_grids,
                              Minutes transfer_penalty);

/// True iff the allocation stays within the visible set and the minute
/// budget: sum(x) + rho + eta <= stage length.
bool is_feasible_action(const StageState& stage, const Action& action);

/// Throws ValidationError unless `a` has exactly one feasible action per
/// stage satellite.
void validate_allocation(const StageState& stage, const AllocationFile& a);

/// max_j y_j over all grids, the quantity the game minimizes.
double objective(const StageState& stage, const AllocationFile& a);

/// One null action per stage satellite.
AllocationFile all_null_file(const StageState& stage);

/// Throws ValidationError naming the offending entry if any scenario
/// invariant fails.
void validate_scenario(const Scenario& s);

}  // namespace dgap
