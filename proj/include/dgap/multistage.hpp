#pragma once

#include <map>
#include <vector>

#include "dgap/learning.hpp"
#include "dgap/types.hpp"

namespace dgap {

/// The horizon cut into consecutive stages. Stages tile the horizon in
/// stage_length steps and are additionally split at every window endpoint, so
/// visibility and tables are constant inside each stage. A final (or split)
/// stage may be shorter; its budget is its length.
struct StageSchedule {
  std::vector<StageState> stages;
};

StageSchedule segment_timeline(const Scenario& scenario);

/// Per-satellite payload transfer charge for `stage`, computed from the
/// support of the previous stage's final file against the stage's visible
/// set, capped at the stage budget. Null `prev` (stage 1) gives all zeros.
std::map<SatelliteId, Minutes> chain_transition_times(const AllocationFile* prev,
                                                      const StageState& stage,
                                                      Minutes transfer_penalty);

struct DgapStageResult {
  int stage_index{};
  Minutes start{};
  Minutes length{};
  bool idle{false};
  AllocationFile allocation;
  double objective{};
  std::map<SatelliteId, Minutes> eta;
  IterationTrace trace;
  double wall_seconds{};
};

struct DgapResult {
  std::vector<DgapStageResult> stages;
};

/// Chained multi-stage solve: each stage's eta comes from the previous
/// stage's final file, then the stage is solved as a fresh game. With
/// config.warm_start the previous file (filtered to still-feasible entries
/// and greedily topped up) seeds the stage instead of a plain greedy start.
DgapResult run_dgap(const Scenario& scenario, const LearnerConfig& config);

}  // namespace dgap
