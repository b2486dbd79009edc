#include "dgap/scenario_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "dgap/errors.hpp"
#include "dgap/model.hpp"
#include "dgap/random.hpp"

namespace dgap {
namespace {

using nlohmann::json;

void require_keys(const json& obj, std::initializer_list<const char*> allowed,
                  const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* k) { return key == k; }) == allowed.end())
      throw ValidationError(where + ": unknown field '" + key + "'");
  }
}

const json& require_field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(where + ": missing field '" + key + "'");
  return *it;
}

int get_int(const json& obj, const char* key, const std::string& where) {
  const json& v = require_field(obj, key, where);
  if (!v.is_number_integer())
    throw ValidationError(where + ": field '" + key + "' must be an integer");
  return v.get<int>();
}

double get_number(const json& obj, const char* key, const std::string& where) {
  const json& v = require_field(obj, key, where);
  if (!v.is_number()) throw ValidationError(where + ": field '" + key + "' must be a number");
  return v.get<double>();
}

std::vector<int> get_id_list(const json& root, const char* key) {
  const json& v = require_field(root, key, "scenario");
  if (!v.is_array()) throw ValidationError(std::string("scenario: '") + key + "' must be an array");
  std::vector<int> out;
  for (const json& e : v) {
    if (!e.is_number_integer())
      throw ValidationError(std::string("scenario: '") + key + "' entries must be integers");
    out.push_back(e.get<int>());
  }
  return out;
}

// Expands the {"default": a} / {"range": [lo, hi], "seed": s} capacity
// shorthands over every pair that has a window. Range draws are per pair,
// deterministic in (sorted pair order, seed).
void expand_capacity_shorthand(const json& spec, Scenario& s) {
  require_keys(spec, {"default", "range", "seed"}, "capacity");
  std::set<std::pair<SatelliteId, GridId>> pairs;
  for (const TimeWindow& w : s.windows) pairs.insert({w.sat, w.grid});
  if (spec.contains("default")) {
    if (spec.contains("range")) throw ValidationError("capacity: give 'default' or 'range', not both");
    const double alpha = get_number(spec, "default", "capacity");
    for (const auto& [sat, grid] : pairs) s.capacity[{sat, grid, kAllStages}] = alpha;
    return;
  }
  if (!spec.contains("range"))
    throw ValidationError("capacity: shorthand object needs 'default' or 'range'");
  const json& range = spec.at("range");
  if (!range.is_array() || range.size() != 2 || !range[0].is_number() || !range[1].is_number())
    throw ValidationError("capacity: 'range' must be [lo, hi]");
  const double lo = range[0].get<double>(), hi = range[1].get<double>();
  if (lo > hi) throw ValidationError("capacity: empty range");
  const std::uint64_t seed =
      spec.contains("seed") ? get_int(spec, "seed", "capacity") : 0u;
  RandomSource rng(seed);
  for (const auto& [sat, grid] : pairs)
    s.capacity[{sat, grid, kAllStages}] = rng.uniform_real(lo, hi);
}

}  // namespace

Scenario scenario_from_json(const json& root) {
  if (!root.is_object()) throw ValidationError("scenario: top level must be an object");
  require_keys(root, {"satellites", "grids", "windows", "capacity", "load", "constants"},
               "scenario");
  Scenario s;
  s.satellites = get_id_list(root, "satellites");
  s.grids = get_id_list(root, "grids");

  const json& constants = require_field(root, "constants", "scenario");
  require_keys(constants, {"H", "C", "dt", "horizon"}, "constants");
  s.transfer_penalty = get_int(constants, "H", "constants");
  s.transition_constant = get_int(constants, "C", "constants");
  s.stage_length = get_int(constants, "dt", "constants");
  const json& horizon = require_field(constants, "horizon", "constants");
  if (!horizon.is_array() || horizon.size() != 2 || !horizon[0].is_number_integer() ||
      !horizon[1].is_number_integer())
    throw ValidationError("constants: 'horizon' must be [begin, end] in integer minutes");
  s.horizon_begin = horizon[0].get<int>();
  s.horizon_end = horizon[1].get<int>();

  const json& windows = require_field(root, "windows", "scenario");
  if (!windows.is_array()) throw ValidationError("scenario: 'windows' must be an array");
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const std::string where = "windows[" + std::to_string(i) + "]";
    const json& w = windows[i];
    if (!w.is_object()) throw ValidationError(where + ": must be an object");
    require_keys(w, {"sat", "grid", "begin_min", "end_min"}, where);
    s.windows.push_back(TimeWindow{get_int(w, "sat", where), get_int(w, "grid", where),
                                   get_int(w, "begin_min", where), get_int(w, "end_min", where)});
  }
  std::sort(s.windows.begin(), s.windows.end());

  const json& capacity = require_field(root, "capacity", "scenario");
  if (capacity.is_object()) {
    expand_capacity_shorthand(capacity, s);
  } else if (capacity.is_array()) {
    for (std::size_t i = 0; i < capacity.size(); ++i) {
      const std::string where = "capacity[" + std::to_string(i) + "]";
      const json& c = capacity[i];
      if (!c.is_object()) throw ValidationError(where + ": must be an object");
      require_keys(c, {"sat", "grid", "stage", "alpha"}, where);
      const int stage = c.contains("stage") ? get_int(c, "stage", where) : kAllStages;
      const auto key = std::make_tuple(get_int(c, "sat", where), get_int(c, "grid", where), stage);
      if (s.capacity.count(key)) throw ValidationError(where + ": duplicate capacity entry");
      s.capacity[key] = get_number(c, "alpha", where);
    }
  } else {
    throw ValidationError("scenario: 'capacity' must be an array or a shorthand object");
  }

  const json& load = require_field(root, "load", "scenario");
  if (!load.is_array()) throw ValidationError("scenario: 'load' must be an array");
  for (std::size_t i = 0; i < load.size(); ++i) {
    const std::string where = "load[" + std::to_string(i) + "]";
    const json& l = load[i];
    if (!l.is_object()) throw ValidationError(where + ": must be an object");
    require_keys(l, {"grid", "stage", "beta"}, where);
    const int stage = l.contains("stage") ? get_int(l, "stage", where) : kAllStages;
    const auto key = std::make_pair(get_int(l, "grid", where), stage);
    if (s.load.count(key)) throw ValidationError(where + ": duplicate load entry");
    s.load[key] = get_number(l, "beta", where);
  }

  validate_scenario(s);
  return s;
}

json scenario_to_json(const Scenario& s) {
  json root;
  root["satellites"] = s.satellites;
  root["grids"] = s.grids;
  root["constants"] = {{"H", s.transfer_penalty},
                       {"C", s.transition_constant},
                       {"dt", s.stage_length},
                       {"horizon", {s.horizon_begin, s.horizon_end}}};
  json windows = json::array();
  std::vector<TimeWindow> sorted = s.windows;
  std::sort(sorted.begin(), sorted.end());
  for (const TimeWindow& w : sorted)
    windows.push_back(
        {{"sat", w.sat}, {"grid", w.grid}, {"begin_min", w.begin}, {"end_min", w.end}});
  root["windows"] = std::move(windows);
  json capacity = json::array();
  for (const auto& [key, alpha] : s.capacity) {
    const auto& [sat, grid, stage] = key;
    capacity.push_back({{"sat", sat}, {"grid", grid}, {"stage", stage}, {"alpha", alpha}});
  }
  root["capacity"] = std::move(capacity);
  json load = json::array();
  for (const auto& [key, beta] : s.load) {
    const auto& [grid, stage] = key;
    load.push_back({{"grid", grid}, {"stage", stage}, {"beta", beta}});
  }
  root["load"] = std::move(load);
  return root;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file: " + path);
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("scenario parse error in " + path + ": " + e.what());
  }
  try {
    return scenario_from_json(root);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void save_scenario(const Scenario& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write scenario file: " + path);
  out << scenario_to_json(s).dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

ScenarioSpec regional_preset() { return ScenarioSpec{}; }

ScenarioSpec global_preset() {
  ScenarioSpec spec;
  spec.satellites = 100;
  spec.grids = 30;
  spec.visibility = 0.2;
  return spec;
}

Scenario generate_scenario(const ScenarioSpec& spec) {
  if (spec.satellites < 1 || spec.grids < 1)
    throw ValidationError("spec: needs at least one satellite and one grid");
  if (!(spec.visibility > 0.0) || spec.visibility > 1.0)
    throw ValidationError("spec: visibility must be in (0, 1]");
  if (spec.beta_lo < 0.0 || spec.beta_lo > spec.beta_hi)
    throw ValidationError("spec: load range must satisfy 0 <= lo <= hi");
  if (!(spec.alpha_lo > 0.0) || spec.alpha_lo > spec.alpha_hi)
    throw ValidationError("spec: capacity range must satisfy 0 < lo <= hi");
  if (spec.stage_length < 1) throw ValidationError("spec: dt must be >= 1");
  if (spec.horizon_end - spec.horizon_begin < spec.stage_length)
    throw ValidationError("spec: horizon must hold at least one stage");
  for (double g : spec.load_growth)
    if (g < 0.0) throw ValidationError("spec: load growth factors must be >= 0");

  RandomSource rng(spec.seed);
  Scenario s;
  s.transfer_penalty = spec.transfer_penalty;
  s.transition_constant = spec.transition_constant;
  s.stage_length = spec.stage_length;
  s.horizon_begin = spec.horizon_begin;
  s.horizon_end = spec.horizon_end;
  for (int i = 1; i <= spec.satellites; ++i) s.satellites.push_back(i);
  for (int j = 1; j <= spec.grids; ++j) s.grids.push_back(j);

  // Windows start at the horizon begin and run for at least one stage, so
  // the first stage always has the full cast; later stages thin out as
  // windows close.
  auto add_pair = [&](SatelliteId sat, GridId grid, Minutes end) {
    s.windows.push_back(TimeWindow{sat, grid, spec.horizon_begin, end});
    s.capacity[{sat, grid, kAllStages}] = rng.uniform_real(spec.alpha_lo, spec.alpha_hi);
  };
  for (SatelliteId sat : s.satellites) {
    for (GridId grid : s.grids) {
      if (rng.uniform01() < spec.visibility) {
        const Minutes end =
            spec.horizon_begin + spec.stage_length +
            static_cast<Minutes>(rng.below(spec.horizon_end - spec.horizon_begin -
                                           spec.stage_length + 1));
        add_pair(sat, grid, end);
      }
    }
  }
  // coverage fixes: every satellite sees something, every grid is seen
  std::set<SatelliteId> covered_sats;
  std::set<GridId> covered_grids;
  for (const TimeWindow& w : s.windows) {
    covered_sats.insert(w.sat);
    covered_grids.insert(w.grid);
  }
  for (SatelliteId sat : s.satellites)
    if (!covered_sats.count(sat))
      add_pair(sat, s.grids[rng.below(s.grids.size())], spec.horizon_end);
  for (GridId grid : s.grids)
    if (!covered_grids.count(grid))
      add_pair(s.satellites[rng.below(s.satellites.size())], grid, spec.horizon_end);
  std::sort(s.windows.begin(), s.windows.end());

  const int nominal_stages = static_cast<int>(
      (spec.horizon_end - spec.horizon_begin + spec.stage_length - 1) / spec.stage_length);
  for (GridId grid : s.grids) {
    const double base = rng.uniform_real(spec.beta_lo, spec.beta_hi);
    if (spec.load_growth.empty()) {
      s.load[{grid, kAllStages}] = base;
    } else {
      for (int k = 1; k <= nominal_stages; ++k) {
        const std::size_t g = std::min<std::size_t>(k - 1, spec.load_growth.size() - 1);
        s.load[{grid, k}] = base * spec.load_growth[g];
      }
    }
  }
  validate_scenario(s);
  return s;
}

}  // namespace dgap
