#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dgap/actions.hpp"
#include "dgap/random.hpp"
#include "dgap/types.hpp"

namespace dgap {

/// SeTVBRP and its ablations. Se = selective action sampling (omega schedule),
/// TV = time-variant smoothing (epsilon schedule). BRA is the pure
/// best-response baseline: no inertia, trial = argmax of the better set.
enum class Variant { kSeTVBRP, kTVBRP, kSeBRP, kBRP, kBRA };

bool uses_time_variant(Variant v);
bool uses_selective(Variant v);
const char* variant_name(Variant v);
std::optional<Variant> parse_variant(std::string_view name);

struct ScheduleParams {
  double eps_upper{15.4};
  double eps_lower{1.0};
  double xi{0.15};        // epsilon decay per iteration once the decay starts
  double tau{0.5};        // fraction of t_max spent before the decay starts
  double omega_lower{0.06};
  double omega_upper{1.0};
  double phi_ratio{0.005};  // omega growth per iteration
  int t_max{500};
};

/// eps(t): eps_upper until tau*t_max, then linear decay at slope xi, floored
/// at eps_lower. Nonincreasing in t.
double epsilon_schedule(int t, const ScheduleParams& p);

/// omega(t) = clamp(t * phi_ratio, omega_lower, omega_upper). Nondecreasing.
double omega_schedule(int t, const ScheduleParams& p);

/// First iteration at which eps(t) reaches eps_lower (T_f). May exceed t_max.
int first_floor_iteration(const ScheduleParams& p);

struct ScheduleIssue {
  bool warning{false};  // true: schedule is legal but likely misconfigured
  std::string message;
};

/// Sweeps t = 1..t_max checking monotonicity and bounds. Hard violations and
/// soft warnings (e.g. omega can never reach omega_upper) share the list,
/// distinguished by the flag.
std::vector<ScheduleIssue> validate_schedules(const ScheduleParams& p);

struct LearnerConfig {
  Variant variant{Variant::kSeTVBRP};
  ScheduleParams schedule{};
  double inertia{0.2};  // probability of keeping the old action despite a better one
  std::uint64_t seed{0};
  bool early_stop{false};  // certified-Nash stop after T_f; never changes the result
  std::size_t action_cap{kDefaultActionCap};
  bool warm_start{false};  // multistage only: reuse previous stage's file as seed
};

void validate_config(const LearnerConfig& config);

struct StepRecord {
  int iteration{};
  SatelliteId actor{};
  bool accepted{};
  double objective{};  // max remaining load after the step
  double potential{};  // phi at this iteration's epsilon
};

struct IterationTrace {
  std::vector<StepRecord> steps;
  int last_improvement{0};  // last iteration where the best-so-far objective dropped
  bool nash_certified{false};
  int t_floor{1};  // T_f of the effective schedule
};

struct LearnerResult {
  AllocationFile final_allocation;
  IterationTrace trace;
};

/// One iteration: the round-robin actor samples its action subset, collects
/// strict better replies against the incumbent, and adopts a trial with
/// probability 1 - inertia. Everyone else keeps their action.
std::pair<AllocationFile, StepRecord> setvbrp_step(const StageState& stage,
                                                   const AllocationFile& a, int t,
                                                   const LearnerConfig& config,
                                                   RandomSource& rng);

/// Full run from greedy_init (or `initial` when given). With early_stop set,
/// stops once a full round-robin sweep past T_f finds no better reply in the
/// complete action sets.
LearnerResult run_learner(const StageState& stage, const LearnerConfig& config,
                          const AllocationFile* initial = nullptr);

}  // namespace dgap
