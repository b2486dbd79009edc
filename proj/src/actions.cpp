#include "dgap/actions.hpp"

#include <algorithm>
#include <cmath>

#include "dgap/errors.hpp"
#include "dgap/model.hpp"
#include "dgap/potential.hpp"

namespace dgap {
namespace {

// Appends, in lexicographic minute order, every assignment of >= 1 minute to
// grids[combo] with the given spare budget.
void emit_minutes(const std::vector<GridId>& grids, const std::vector<int>& combo,
                  std::size_t pos, Minutes spare, Action& partial,
                  std::vector<Action>& out, std::size_t cap, SatelliteId owner) {
  if (pos == combo.size()) {
    if (out.size() >= cap)
      throw CapacityError("action space for satellite " + std::to_string(owner) +
                          " exceeds the cap of " + std::to_string(cap) +
                          "; use a coarser time granularity or a smaller budget");
    out.push_back(partial);
    return;
  }
  const Minutes slots_after = static_cast<Minutes>(combo.size() - pos - 1);
  for (Minutes x = 1; x + slots_after <= spare; ++x) {
    partial.allocation[grids[combo[pos]]] = x;
    emit_minutes(grids, combo, pos + 1, spare - x, partial, out, cap, owner);
    partial.allocation.erase(grids[combo[pos]]);
  }
}

}  // namespace

std::size_t ActionSpace::index_of(const Action& action) const {
  for (std::size_t i = 0; i < actions.size(); ++i)
    if (actions[i].allocation == action.allocation) return i;
  throw ValidationError("action not found in the action space of satellite " +
                        std::to_string(owner));
}

ActionSpace enumerate_actions(const StageState& stage, SatelliteId sat, std::size_t cap) {
  auto vis_it = stage.visible_grids.find(sat);
  if (vis_it == stage.visible_grids.end())
    throw ValidationError("enumerate_actions: unknown satellite " + std::to_string(sat));
  ActionSpace space;
  space.owner = sat;
  space.actions.push_back(Action{sat, {}});  // null action first

  auto eta_it = stage.eta.find(sat);
  const Minutes eta = eta_it == stage.eta.end() ? 0 : eta_it->second;
  const Minutes budget = stage.length - eta;
  if (budget <= 0 || vis_it->second.empty()) return space;

  const std::vector<GridId> grids(vis_it->second.begin(), vis_it->second.end());
  const Minutes per_grid = 1 + stage.transition_constant;
  const int max_support =
      std::min<int>(static_cast<int>(grids.size()), budget / std::max<Minutes>(per_grid, 1));

  Action partial{sat, {}};
  for (int s = 1; s <= max_support; ++s) {
    std::vector<int> combo(s);
    for (int i = 0; i < s; ++i) combo[i] = i;
    for (;;) {
      const Minutes spare = budget - s * stage.transition_constant;
      emit_minutes(grids, combo, 0, spare, partial, space.actions, cap, sat);
      // advance to the next combination in lexicographic order
      int pos = s - 1;
      while (pos >= 0 && combo[pos] == static_cast<int>(grids.size()) - s + pos) --pos;
      if (pos < 0) break;
      ++combo[pos];
      for (int i = pos + 1; i < s; ++i) combo[i] = combo[i - 1] + 1;
    }
  }
  return space;
}

AllocationFile greedy_complete(const StageState& stage, AllocationFile file) {
  for (const auto& [sat, grids] : stage.visible_grids)
    if (!file.actions.count(sat)) file.actions[sat] = Action{sat, {}};
  validate_allocation(stage, file);

  std::map<GridId, double> remaining;
  for (const auto& [grid, beta] : stage.beta)
    remaining[grid] = remaining_load(stage, file, grid);

  for (auto& [sat, action] : file.actions) {
    const auto& vis = stage.visible_grids.at(sat);
    if (vis.empty()) continue;
    auto eta_it = stage.eta.find(sat);
    const Minutes eta = eta_it == stage.eta.end() ? 0 : eta_it->second;
    Minutes used = action.total_minutes() +
                   imaging_transition_time(action, stage.transition_constant) + eta;
    for (;;) {
      GridId pick = 0;
      double best_score = 0.0;
      bool found = false;
      for (GridId grid : vis) {
        const double score = stage.alpha.at({sat, grid}) * remaining.at(grid);
        if (!(score > 0.0)) continue;
        const Minutes cost =
            action.allocation.count(grid) ? 1 : 1 + stage.transition_constant;
        if (used + cost > stage.length) continue;
        if (!found || score > best_score) {  // ties keep the lowest grid id
          pick = grid;
          best_score = score;
          found = true;
        }
      }
      if (!found) break;
      const bool opening = !action.allocation.count(pick);
      action.allocation[pick] += 1;
      used += opening ? 1 + stage.transition_constant : 1;
      remaining.at(pick) -= stage.alpha.at({sat, pick});
    }
  }
  return file;
}

AllocationFile greedy_init(const StageState& stage) {
  return greedy_complete(stage, all_null_file(stage));
}

std::vector<Action> sample_action_subset(const ActionSpace& space, double omega,
                                         const Action& incumbent, RandomSource& rng) {
  if (!(omega > 0.0) || omega > 1.0)
    throw ValidationError("sample_action_subset: omega must be in (0, 1]");
  const std::size_t n = space.actions.size();
  std::size_t k = static_cast<std::size_t>(std::ceil(omega * static_cast<double>(n)));
  k = std::clamp<std::size_t>(k, 1, n);
  if (k == n) return space.actions;  // identity; leaves the rng untouched

  const std::size_t inc = space.index_of(incumbent);
  std::vector<std::size_t> pool;
  pool.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i)
    if (i != inc) pool.push_back(i);
  // shuffle whichever side is smaller; the complement of a uniform subset
  // is a uniform subset
  const std::size_t keep = k - 1;
  const std::size_t drop = pool.size() - keep;
  const std::size_t moves = std::min(keep, drop);
  for (std::size_t d = 0; d < moves; ++d) {
    const std::size_t j = d + static_cast<std::size_t>(rng.below(pool.size() - d));
    std::swap(pool[d], pool[j]);
  }
  std::vector<std::size_t> chosen(keep <= drop
                                      ? std::vector<std::size_t>(pool.begin(), pool.begin() + keep)
                                      : std::vector<std::size_t>(pool.begin() + drop, pool.end()));
  chosen.push_back(inc);

  std::vector<Action> out;
  out.reserve(k);
  for (std::size_t i : chosen) out.push_back(space.actions[i]);
  return out;
}

std::vector<Action> better_reply_set(const StageState& stage, const AllocationFile& a,
                                     SatelliteId sat, const std::vector<Action>& subset,
                                     double eps) {
  auto self_it = a.actions.find(sat);
  if (self_it == a.actions.end())
    throw ValidationError("better_reply_set: unknown satellite " + std::to_string(sat));
  const LocalUtilityEvaluator evaluator(stage, a, sat, eps);
  const double incumbent_utility = evaluator.utility(self_it->second);
  std::vector<Action> better;
  for (const Action& candidate : subset) {
    if (evaluator.utility(candidate) > incumbent_utility + kBetterReplyTolerance)
      better.push_back(candidate);
  }
  return better;
}

}  // namespace dgap
