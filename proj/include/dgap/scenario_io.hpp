#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "dgap/types.hpp"

namespace dgap {

/// Parameters of the synthetic scenario generator. Windows are synthetic by
/// design (each pair is visible with probability `visibility` and gets a
/// window starting at the horizon begin), not orbital-mechanically faithful.
struct ScenarioSpec {
  int satellites{25};
  int grids{9};
  double visibility{0.45};  // per (satellite, grid) window probability
  double beta_lo{30.0}, beta_hi{80.0};
  double alpha_lo{2.0}, alpha_hi{3.0};
  Minutes transfer_penalty{2};     // H
  Minutes transition_constant{1};  // C
  Minutes stage_length{10};        // dt
  Minutes horizon_begin{0};
  Minutes horizon_end{30};
  std::vector<double> load_growth;  // per nominal stage multipliers; empty = flat
  std::uint64_t seed{0};
};

ScenarioSpec regional_preset();  // 25 satellites, 9 grids
ScenarioSpec global_preset();    // 100 satellites, 30 grids

/// Deterministic given the seed. Every satellite sees at least one grid and
/// every grid is seen by at least one satellite.
Scenario generate_scenario(const ScenarioSpec& spec);

/// Canonical JSON form: sorted keys, explicit stage fields, sorted entry
/// arrays. save(load(x)) is byte-identical for canonical files.
nlohmann::json scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j);

Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& s, const std::string& path);

}  // namespace dgap
