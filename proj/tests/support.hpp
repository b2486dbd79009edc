#pragma once

#include <map>
#include <set>
#include <vector>

#include "dgap/actions.hpp"
#include "dgap/model.hpp"
#include "dgap/random.hpp"
#include "dgap/types.hpp"

namespace dgap::testing {

/// Hand-rolled stage builder for tests. Fills the satellite/grid entries and
/// the visibility transpose so invariants hold by construction.
class StageBuilder {
 public:
  StageBuilder& length(Minutes v) {
    stage_.length = v;
    return *this;
  }
  StageBuilder& transition(Minutes c) {
    stage_.transition_constant = c;
    return *this;
  }
  StageBuilder& grid(GridId g, double beta) {
    stage_.beta[g] = beta;
    stage_.visible_sats.emplace(g, std::set<SatelliteId>{});
    return *this;
  }
  StageBuilder& sat(SatelliteId s, std::vector<GridId> vis, Minutes eta = 0) {
    auto& grids = stage_.visible_grids[s];
    for (GridId g : vis) grids.insert(g);
    stage_.eta[s] = eta;
    return *this;
  }
  StageBuilder& alpha(SatelliteId s, GridId g, double a) {
    explicit_alpha_[{s, g}] = a;
    return *this;
  }
  StageBuilder& alpha_all(double a) {
    default_alpha_ = a;
    return *this;
  }

  StageState build() const {
    StageState stage = stage_;
    for (const auto& [sat, grids] : stage.visible_grids) {
      for (GridId g : grids) {
        stage.visible_sats[g].insert(sat);
        auto it = explicit_alpha_.find({sat, g});
        stage.alpha[{sat, g}] = it != explicit_alpha_.end() ? it->second : default_alpha_;
      }
    }
    return stage;
  }

 private:
  StageState stage_ = [] {
    StageState s;
    s.length = 10;
    s.transition_constant = 1;
    return s;
  }();
  std::map<std::pair<SatelliteId, GridId>, double> explicit_alpha_;
  double default_alpha_ = 1.0;
};

/// Independent counting oracle for the feasible action set: every grid is
/// either skipped or given >= 1 minute plus the per-grid transition charge.
inline long long count_feasible_actions(int grids_left, Minutes budget, Minutes c) {
  if (grids_left == 0) return 1;
  long long total = count_feasible_actions(grids_left - 1, budget, c);  // skip this grid
  for (Minutes x = 1; x + c <= budget; ++x)
    total += count_feasible_actions(grids_left - 1, budget - x - c, c);
  return total;
}

inline long long count_feasible_actions(int grids, Minutes dt, Minutes c, Minutes eta) {
  return count_feasible_actions(grids, dt - eta, c);
}

struct RandomStageSpec {
  int sats_lo = 2, sats_hi = 3;
  int grids_lo = 2, grids_hi = 3;
  Minutes dt_lo = 4, dt_hi = 6;
  Minutes transition = 1;
  double beta_lo = 2.0, beta_hi = 12.0;
  double alpha_lo = 2.0, alpha_hi = 3.0;
  double visibility = 0.8;
};

inline StageState random_stage(RandomSource& rng, const RandomStageSpec& spec = {}) {
  for (;;) {
    const int n = rng.uniform_int(spec.sats_lo, spec.sats_hi);
    const int m = rng.uniform_int(spec.grids_lo, spec.grids_hi);
    StageBuilder builder;
    builder.length(rng.uniform_int(spec.dt_lo, spec.dt_hi)).transition(spec.transition);
    for (int g = 1; g <= m; ++g) builder.grid(g, rng.uniform_real(spec.beta_lo, spec.beta_hi));
    bool any = false;
    for (int s = 1; s <= n; ++s) {
      std::vector<GridId> vis;
      for (int g = 1; g <= m; ++g) {
        if (rng.uniform01() < spec.visibility) {
          vis.push_back(g);
          builder.alpha(s, g, rng.uniform_real(spec.alpha_lo, spec.alpha_hi));
        }
      }
      any = any || !vis.empty();
      builder.sat(s, vis);
    }
    if (any) return builder.build();
  }
}

inline std::vector<ActionSpace> all_spaces(const StageState& stage) {
  std::vector<ActionSpace> spaces;
  for (const auto& [sat, grids] : stage.visible_grids)
    spaces.push_back(enumerate_actions(stage, sat));
  return spaces;
}

inline AllocationFile random_profile(const std::vector<ActionSpace>& spaces,
                                     RandomSource& rng) {
  AllocationFile file;
  for (const ActionSpace& space : spaces)
    file.actions[space.owner] = space.actions[rng.below(space.actions.size())];
  return file;
}

}  // namespace dgap::testing
