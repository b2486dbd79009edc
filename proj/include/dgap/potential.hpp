#pragma once

#include <map>

#include "dgap/types.hpp"

namespace dgap {

/// The utility normalizer P and the pieces it is assembled from:
///   P = N * (1 - e^{-t*alpha_max/eps}) * e^{beta_max/eps}
/// with t the stage budget and N the largest feasible support size over all
/// satellites (clamped to at least 1 so P stays positive on stages where no
/// satellite can open a grid). `scale` is P without the e^{beta_max/eps}
/// factor; it is always finite and is what the shift-normalized evaluation
/// paths divide by.
struct Normalizer {
  double value{};
  double log_value{};
  double alpha_max{};
  double beta_max{};
  int n_max{};  // unclamped feasibility bound; may be 0
  Minutes budget{};
  double scale{};
};

/// h(x) = eps * log sum_j e^{y_j/eps}, evaluated with a max shift so large
/// loads and small eps cannot overflow.
double smooth_objective(const StageState& stage, const AllocationFile& a, double eps);

/// U = -sum_j e^{y_j/eps} = -e^{h/eps}; always negative. Overflows to -inf
/// only when the true value does.
double global_utility(const StageState& stage, const AllocationFile& a, double eps);

/// Throws ValidationError on a degenerate stage (no visible pair).
Normalizer normalizer(const StageState& stage, double eps);

/// U(a_i, a_-i) - U(a_i0, a_-i): the raw wonderful-life marginal of
/// satellite i. Always >= 0.
double marginal_contribution(const StageState& stage, const AllocationFile& a,
                             SatelliteId sat, double eps);

/// marginal_contribution / P, in [0, 1] by construction of P.
double local_utility(const StageState& stage, const AllocationFile& a,
                     SatelliteId sat, double eps);

/// phi = U / P. Unilateral local-utility differences equal phi differences
/// exactly, which makes better replies ascend phi.
double potential(const StageState& stage, const AllocationFile& a, double eps);

/// Evaluates one satellite's local utility against a fixed a_{-i}. All
/// exponents are shifted by beta_max so nothing overflows. Candidate actions
/// must allocate only visible grids.
class LocalUtilityEvaluator {
 public:
  LocalUtilityEvaluator(const StageState& stage, const AllocationFile& a,
                        SatelliteId self, double eps);

  /// Equals local_utility(stage, (candidate, a_{-i}), self, eps).
  double utility(const Action& candidate) const;

 private:
  std::map<GridId, double> exp_y_;   // e^{(beta_j - others_j - beta_max)/eps}
  std::map<GridId, double> alpha_;
  double scale_{};
  double eps_{};
};

}  // namespace dgap
