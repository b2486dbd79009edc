#pragma once

#include <cstddef>
#include <vector>

#include "dgap/actions.hpp"
#include "dgap/random.hpp"
#include "dgap/types.hpp"

namespace dgap {

/// Joint-profile budget for exhaustive scans.
inline constexpr double kDefaultJointCap = 5e7;

/// How many optimal profiles a report keeps (all optima are counted either
/// way).
inline constexpr std::size_t kOptimalProfileCap = 32;

struct OracleReport {
  double optimum{};  // exact minimum of the max-remaining-load objective
  std::vector<AllocationFile> optimal_profiles;  // in scan order, capped
  std::size_t optimal_count{};
  double joint_space_size{};
  double elapsed_seconds{};
};

/// Product of per-satellite action space sizes (infinity-safe double).
double joint_space_size(const StageState& stage, std::size_t action_cap = kDefaultActionCap);

/// Exhaustive scan of the joint action space, minimizing the true min-max
/// objective. Deterministic lexicographic tie order. Refuses (CapacityError)
/// when the joint space exceeds `cap`.
OracleReport brute_force_optimum(const StageState& stage, double cap = kDefaultJointCap);

/// Exhaustive scan minimizing the smoothed objective h (equivalently,
/// maximizing the global utility U). Same determinism and cap rules.
OracleReport brute_force_smooth_optimum(const StageState& stage, double eps,
                                        double cap = kDefaultJointCap);

/// True iff no satellite has a unilateral deviation whose local utility
/// beats its current one by more than kBetterReplyTolerance.
bool is_nash_equilibrium(const StageState& stage, const AllocationFile& a, double eps,
                         std::size_t action_cap = kDefaultActionCap);

/// Samples random tuples (i, a_-i, a'_i, a''_i) and returns the worst
/// relative gap between the local-utility difference and the potential
/// difference. Exactness contract: <= 1e-9.
double check_exact_potential(const StageState& stage, double eps, int samples,
                             RandomSource& rng);

struct SandwichBound {
  double lower{};   // max_j y_j
  double middle{};  // h(x)
  double upper{};   // max_j y_j + eps * log m
};

/// The log-sum-exp sandwich around the true objective; lower <= middle <=
/// upper must hold for every feasible profile.
SandwichBound sandwich_bound_check(const StageState& stage, const AllocationFile& a,
                                   double eps);

}  // namespace dgap
