#pragma once

#include <map>
#include <set>
#include <tuple>
#include <utility>
#include <vector>

namespace dgap {

using SatelliteId = int;
using GridId = int;
using Minutes = int;

/// Stage key used in capacity/load tables meaning "every stage".
inline constexpr int kAllStages = 0;

/// Closed interval [begin, end] during which `sat` can observe `grid`.
struct TimeWindow {
  SatelliteId sat{};
  GridId grid{};
  Minutes begin{};
  Minutes end{};

  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
  friend auto operator<=>(const TimeWindow&, const TimeWindow&) = default;
};

/// A full problem instance over a time horizon. Capacity (alpha, load-units
/// per minute) and load (beta, load-units) tables are keyed by nominal stage
/// index (1-based, counted in stage_length steps from horizon_begin); the key
/// kAllStages applies to every stage.
struct Scenario {
  std::vector<SatelliteId> satellites;
  std::vector<GridId> grids;
  std::vector<TimeWindow> windows;
  std::map<std::tuple<SatelliteId, GridId, int>, double> capacity;
  std::map<std::pair<GridId, int>, double> load;
  Minutes transfer_penalty{0};     // H, minutes lost when slewing to a disjoint grid set
  Minutes transition_constant{1};  // C, minutes charged per allocated grid
  Minutes stage_length{10};        // dt
  Minutes horizon_begin{0};
  Minutes horizon_end{0};

  /// Lookup with fallback to the kAllStages entry. Returns nullptr if absent.
  const double* capacity_at(SatelliteId sat, GridId grid, int stage) const;
  const double* load_at(GridId grid, int stage) const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// One single-stage allocation instance: everything the game needs, already
/// cut so visibility, alpha and beta are constant across the stage.
struct StageState {
  int stage_index{1};
  Minutes start{0};
  Minutes length{0};               // allocatable budget of this stage
  Minutes transition_constant{0};  // C
  std::map<SatelliteId, std::set<GridId>> visible_grids;  // one entry per satellite
  std::map<GridId, std::set<SatelliteId>> visible_sats;   // one entry per grid
  std::map<std::pair<SatelliteId, GridId>, double> alpha;  // defined exactly on visible pairs
  std::map<GridId, double> beta;
  std::map<SatelliteId, Minutes> eta;  // payload transfer charge per satellite

  bool idle() const {
    for (const auto& [sat, grids] : visible_grids)
      if (!grids.empty()) return false;
    return true;
  }

  std::vector<SatelliteId> satellite_ids() const;
  std::vector<GridId> grid_ids() const;
};

/// One satellite's allocation vector, stored sparsely: absent grid means
/// zero minutes; present entries are always >= 1. The empty map is the null
/// action.
struct Action {
  SatelliteId owner{};
  std::map<GridId, Minutes> allocation;

  bool is_null() const { return allocation.empty(); }
  Minutes total_minutes() const;
  std::set<GridId> support() const;

  friend bool operator==(const Action&, const Action&) = default;
};

/// Joint profile: one action per satellite.
struct AllocationFile {
  std::map<SatelliteId, Action> actions;

  friend bool operator==(const AllocationFile&, const AllocationFile&) = default;
};

}  // namespace dgap
