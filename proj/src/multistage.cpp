#include "dgap/multistage.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include "dgap/actions.hpp"
#include "dgap/errors.hpp"
#include "dgap/model.hpp"

namespace dgap {
namespace {

StageState build_stage(const Scenario& s, int order, Minutes start, Minutes length) {
  StageState stage;
  stage.stage_index = order;
  stage.start = start;
  stage.length = length;
  stage.transition_constant = s.transition_constant;
  const int nominal = (start - s.horizon_begin) / s.stage_length + 1;

  const auto visible = visible_grids(s.windows, start, length);
  for (SatelliteId sat : s.satellites) {
    auto it = visible.find(sat);
    stage.visible_grids[sat] = it == visible.end() ? std::set<GridId>{} : it->second;
    stage.eta[sat] = 0;
  }
  for (GridId grid : s.grids) stage.visible_sats[grid] = {};
  for (const auto& [sat, grids] : stage.visible_grids) {
    for (GridId grid : grids) {
      stage.visible_sats[grid].insert(sat);
      const double* alpha = s.capacity_at(sat, grid, nominal);
      if (!alpha)
        throw ValidationError("stage " + std::to_string(order) + ": no capacity entry for "
                              "visible pair (satellite " + std::to_string(sat) + ", grid " +
                              std::to_string(grid) + ", nominal stage " +
                              std::to_string(nominal) + ")");
      stage.alpha[{sat, grid}] = *alpha;
    }
  }
  for (GridId grid : s.grids) {
    const double* beta = s.load_at(grid, nominal);
    if (!beta)
      throw ValidationError("stage " + std::to_string(order) + ": no load entry for grid " +
                            std::to_string(grid) + " (nominal stage " +
                            std::to_string(nominal) + ")");
    stage.beta[grid] = *beta;
  }
  return stage;
}

// Previous-stage entries that are still visible and still fit the budget;
// anything else falls back to the null action before the greedy top-up.
AllocationFile filtered_warm_start(const AllocationFile& prev, const StageState& stage) {
  AllocationFile file = all_null_file(stage);
  for (auto& [sat, action] : file.actions) {
    auto prev_it = prev.actions.find(sat);
    if (prev_it == prev.actions.end()) continue;
    Action kept{sat, {}};
    const auto& vis = stage.visible_grids.at(sat);
    for (const auto& [grid, x] : prev_it->second.allocation)
      if (vis.count(grid)) kept.allocation[grid] = x;
    if (is_feasible_action(stage, kept)) action = std::move(kept);
  }
  return file;
}

}  // namespace

StageSchedule segment_timeline(const Scenario& scenario) {
  validate_scenario(scenario);
  const Minutes begin = scenario.horizon_begin;
  const Minutes end = scenario.horizon_end;
  if (scenario.stage_length > end - begin)
    throw ValidationError("segment_timeline: dt exceeds the horizon length");

  std::set<Minutes> boundaries{begin, end};
  for (Minutes t = begin + scenario.stage_length; t < end; t += scenario.stage_length)
    boundaries.insert(t);
  for (const TimeWindow& w : scenario.windows) {
    if (w.begin > begin && w.begin < end) boundaries.insert(w.begin);
    if (w.end > begin && w.end < end) boundaries.insert(w.end);
  }

  StageSchedule schedule;
  int order = 1;
  for (auto it = boundaries.begin(); std::next(it) != boundaries.end(); ++it, ++order)
    schedule.stages.push_back(build_stage(scenario, order, *it, *std::next(it) - *it));
  return schedule;
}

std::map<SatelliteId, Minutes> chain_transition_times(const AllocationFile* prev,
                                                      const StageState& stage,
                                                      Minutes transfer_penalty) {
  std::map<SatelliteId, Minutes> eta;
  for (const auto& [sat, visible] : stage.visible_grids) {
    std::set<GridId> prev_support;
    if (prev) {
      auto it = prev->actions.find(sat);
      if (it != prev->actions.end()) prev_support = it->second.support();
    }
    const Minutes raw = payload_transfer_time(prev_support, visible, transfer_penalty);
    eta[sat] = std::min(raw, stage.length);
  }
  return eta;
}

DgapResult run_dgap(const Scenario& scenario, const LearnerConfig& config) {
  validate_config(config);
  const StageSchedule schedule = segment_timeline(scenario);
  DgapResult result;
  const AllocationFile* prev = nullptr;

  for (StageState stage : schedule.stages) {
    stage.eta = chain_transition_times(prev, stage, scenario.transfer_penalty);

    DgapStageResult record;
    record.stage_index = stage.stage_index;
    record.start = stage.start;
    record.length = stage.length;
    record.eta = stage.eta;
    record.idle = stage.idle();
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if (record.idle) {
        record.allocation = all_null_file(stage);
      } else if (config.warm_start && prev) {
        const AllocationFile start = greedy_complete(stage, filtered_warm_start(*prev, stage));
        LearnerResult run = run_learner(stage, config, &start);
        record.allocation = std::move(run.final_allocation);
        record.trace = std::move(run.trace);
      } else {
        LearnerResult run = run_learner(stage, config);
        record.allocation = std::move(run.final_allocation);
        record.trace = std::move(run.trace);
      }
    } catch (const CapacityError& e) {
      throw CapacityError("stage " + std::to_string(stage.stage_index) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError("stage " + std::to_string(stage.stage_index) + ": " + e.what());
    }
    record.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    record.objective = objective(stage, record.allocation);
    result.stages.push_back(std::move(record));
    prev = &result.stages.back().allocation;
  }
  return result;
}

}  // namespace dgap
