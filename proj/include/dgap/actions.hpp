#pragma once

#include <cstddef>
#include <vector>

#include "dgap/random.hpp"
#include "dgap/types.hpp"

namespace dgap {

/// Strictly-better threshold for reply comparisons; exact float ties count
/// as "not better".
inline constexpr double kBetterReplyTolerance = 1e-12;

/// Per-satellite enumeration limit. Desk-scale stages stay far below it.
inline constexpr std::size_t kDefaultActionCap = 200000;

/// Every feasible action of one satellite, null action first, then ordered
/// by support size, lexicographic grid ids, lexicographic minute vectors.
struct ActionSpace {
  SatelliteId owner{};
  std::vector<Action> actions;

  /// Index of an action known to be in the space; throws otherwise.
  std::size_t index_of(const Action& action) const;
};

/// Exhaustive feasible action set. Throws CapacityError instead of
/// truncating when the count would exceed `cap`.
ActionSpace enumerate_actions(const StageState& stage, SatelliteId sat,
                              std::size_t cap = kDefaultActionCap);

/// Deterministic greedy start: satellites in id order, one minute at a time
/// to the affordable visible grid with the largest alpha-weighted remaining
/// load (ties to the lowest grid id), opening a new grid only when the extra
/// C fits. Stops once nothing positive remains in view.
AllocationFile greedy_init(const StageState& stage);

/// Same rule, but topping up an existing partial file in place.
AllocationFile greedy_complete(const StageState& stage, AllocationFile file);

/// ceil(omega * |space|) actions sampled uniformly without replacement; the
/// incumbent is always among them. omega = 1 returns the full space without
/// touching the rng.
std::vector<Action> sample_action_subset(const ActionSpace& space, double omega,
                                         const Action& incumbent, RandomSource& rng);

/// B_i: members of `subset` whose local utility strictly beats the
/// incumbent's by more than kBetterReplyTolerance. Never contains the
/// incumbent.
std::vector<Action> better_reply_set(const StageState& stage, const AllocationFile& a,
                                     SatelliteId sat, const std::vector<Action>& subset,
                                     double eps);

}  // namespace dgap
