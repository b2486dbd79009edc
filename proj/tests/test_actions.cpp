#include <algorithm>
#include <set>

#include "doctest.h"

#include "dgap/actions.hpp"
#include "dgap/errors.hpp"
#include "dgap/model.hpp"
#include "dgap/potential.hpp"
#include "support.hpp"

using namespace dgap;
using dgap::testing::StageBuilder;
using dgap::testing::count_feasible_actions;

namespace {

StageState stage_with_grids(int grids, Minutes dt, Minutes c, Minutes eta) {
  StageBuilder b;
  b.length(dt).transition(c);
  std::vector<GridId> vis;
  for (GridId g = 1; g <= grids; ++g) {
    b.grid(g, 10.0);
    vis.push_back(g);
  }
  b.sat(1, vis, eta);
  b.alpha_all(1.0);
  return b.build();
}

}  // namespace

TEST_CASE("enumeration count matches the independent composition oracle") {
  struct Tuple {
    int grids;
    Minutes dt, c, eta;
  };
  for (const Tuple t : {Tuple{0, 5, 1, 0}, Tuple{1, 3, 1, 0}, Tuple{2, 4, 1, 0},
                        Tuple{3, 6, 1, 0}, Tuple{3, 6, 2, 1}, Tuple{4, 7, 0, 0},
                        Tuple{9, 10, 1, 0}, Tuple{2, 4, 1, 3}}) {
    const StageState stage = stage_with_grids(t.grids, t.dt, t.c, t.eta);
    const ActionSpace space = enumerate_actions(stage, 1);
    CHECK(space.actions.size() ==
          static_cast<std::size_t>(count_feasible_actions(t.grids, t.dt, t.c, t.eta)));
    // every member feasible, no duplicates, null first
    CHECK(space.actions.front().is_null());
    std::set<std::map<GridId, Minutes>> seen;
    for (const Action& a : space.actions) {
      CHECK(is_feasible_action(stage, a));
      CHECK(seen.insert(a.allocation).second);
    }
  }
}

TEST_CASE("enumeration order is frozen: support size, grids, minutes") {
  const StageState stage = stage_with_grids(2, 4, 1, 0);
  const ActionSpace space = enumerate_actions(stage, 1);
  const std::vector<std::map<GridId, Minutes>> expected = {
      {}, {{1, 1}}, {{1, 2}}, {{1, 3}}, {{2, 1}}, {{2, 2}}, {{2, 3}}, {{1, 1}, {2, 1}}};
  REQUIRE(space.actions.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i)
    CHECK(space.actions[i].allocation == expected[i]);
}

TEST_CASE("enumeration cap errors out instead of truncating") {
  const StageState stage = stage_with_grids(3, 6, 1, 0);
  CHECK_THROWS_AS(enumerate_actions(stage, 1, 5), CapacityError);
  CHECK_THROWS_WITH_AS(enumerate_actions(stage, 1, 5), doctest::Contains("cap"), CapacityError);
  CHECK_THROWS_AS(enumerate_actions(stage, 42), ValidationError);  // unknown satellite
}

TEST_CASE("greedy start follows the weighted-remaining rule") {
  const StageState tight = StageBuilder()
                               .length(3)
                               .transition(1)
                               .grid(1, 10.0)
                               .grid(2, 2.0)
                               .sat(1, {1, 2})
                               .alpha_all(1.0)
                               .build();
  CHECK(greedy_init(tight).actions.at(1).allocation == std::map<GridId, Minutes>{{1, 2}});

  const StageState wide = StageBuilder()
                              .length(12)
                              .transition(1)
                              .grid(1, 10.0)
                              .grid(2, 2.0)
                              .sat(1, {1, 2})
                              .alpha_all(1.0)
                              .build();
  CHECK(greedy_init(wide).actions.at(1).allocation ==
        std::map<GridId, Minutes>{{1, 9}, {2, 1}});

  const StageState tie = StageBuilder()
                             .length(6)
                             .transition(1)
                             .grid(1, 7.0)
                             .grid(2, 7.0)
                             .sat(1, {1, 2})
                             .alpha_all(1.0)
                             .build();
  // ties go to the lower grid id; hand simulation gives two minutes each
  CHECK(greedy_init(tie).actions.at(1).allocation ==
        std::map<GridId, Minutes>{{1, 2}, {2, 2}});

  const StageState blind = StageBuilder().length(5).grid(1, 4.0).sat(1, {}).build();
  CHECK(greedy_init(blind).actions.at(1).is_null());
}

TEST_CASE("greedy start is deterministic and feasible") {
  RandomSource rng(17);
  for (int it = 0; it < 25; ++it) {
    const StageState stage = dgap::testing::random_stage(rng);
    const AllocationFile first = greedy_init(stage);
    const AllocationFile second = greedy_init(stage);
    CHECK(first == second);
    CHECK_NOTHROW(validate_allocation(stage, first));
  }
}

TEST_CASE("sample_action_subset honors size, incumbent and determinism") {
  const StageState stage = stage_with_grids(2, 4, 1, 0);
  const ActionSpace space = enumerate_actions(stage, 1);  // 8 actions
  const Action incumbent = space.actions[3];

  RandomSource rng_a(9);
  RandomSource rng_b(9);
  const auto full = sample_action_subset(space, 1.0, incumbent, rng_a);
  CHECK(full.size() == space.actions.size());
  // omega = 1 must not touch the rng: both sources stay in lockstep
  CHECK(rng_a.below(1000) == rng_b.below(1000));

  const auto half = sample_action_subset(space, 0.5, incumbent, rng_a);
  CHECK(half.size() == 4);
  CHECK(std::count(half.begin(), half.end(), incumbent) == 1);
  std::set<std::map<GridId, Minutes>> seen;
  for (const Action& a : half) {
    CHECK(seen.insert(a.allocation).second);
    CHECK_NOTHROW(space.index_of(a));
  }

  RandomSource rng_c(123), rng_d(123);
  CHECK(sample_action_subset(space, 0.4, incumbent, rng_c) ==
        sample_action_subset(space, 0.4, incumbent, rng_d));

  // incumbent present for every omega
  RandomSource rng_e(55);
  for (double omega : {0.1, 0.2, 0.3, 0.6, 0.9}) {
    const auto subset = sample_action_subset(space, omega, incumbent, rng_e);
    CHECK(std::count(subset.begin(), subset.end(), incumbent) == 1);
  }
  CHECK_THROWS_AS(sample_action_subset(space, 0.0, incumbent, rng_e), ValidationError);
}

TEST_CASE("better replies strictly beat the incumbent and raise the potential") {
  const StageState stage = StageBuilder()
                               .length(5)
                               .transition(1)
                               .grid(1, 9.0)
                               .sat(1, {1})
                               .alpha_all(2.0)
                               .build();
  const ActionSpace space = enumerate_actions(stage, 1);

  // a null incumbent with an unserved grid always has better replies
  AllocationFile nulls = all_null_file(stage);
  const auto better = better_reply_set(stage, nulls, 1, space.actions, 1.0);
  CHECK(!better.empty());
  for (const Action& b : better) CHECK(!b.is_null());

  // an exhausted incumbent has none, and B never contains the incumbent
  AllocationFile best = nulls;
  best.actions[1] = Action{1, {{1, 4}}};
  CHECK(better_reply_set(stage, best, 1, space.actions, 1.0).empty());

  RandomSource rng(77);
  for (int it = 0; it < 20; ++it) {
    const StageState random = dgap::testing::random_stage(rng);
    const auto spaces = dgap::testing::all_spaces(random);
    const AllocationFile profile = dgap::testing::random_profile(spaces, rng);
    for (const auto& space_i : spaces) {
      const auto replies =
          better_reply_set(random, profile, space_i.owner, space_i.actions, 1.0);
      const double phi_before = potential(random, profile, 1.0);
      for (const Action& reply : replies) {
        CHECK(reply.allocation != profile.actions.at(space_i.owner).allocation);
        AllocationFile deviated = profile;
        deviated.actions[space_i.owner] = reply;
        CHECK(potential(random, deviated, 1.0) > phi_before);  // exact-potential ascent
      }
    }
  }
}
