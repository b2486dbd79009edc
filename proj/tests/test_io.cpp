#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "dgap/errors.hpp"
#include "dgap/experiment.hpp"
#include "dgap/model.hpp"
#include "dgap/scenario_io.hpp"

using namespace dgap;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// wall time is measurement, not output; blank that column before comparing
std::string mask_time_column(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      out << line << '\n';
      header = false;
      continue;
    }
    int commas = 0;
    for (char& c : line) {
      if (c == ',') ++commas;
    }
    (void)commas;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream split(line);
    while (std::getline(split, field, ',')) fields.push_back(field);
    if (fields.size() >= 5) fields[4] = "-";
    for (std::size_t i = 0; i < fields.size(); ++i)
      out << fields[i] << (i + 1 < fields.size() ? "," : "");
    out << '\n';
  }
  return out.str();
}

std::string temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("dgap_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

ScenarioSpec tiny_spec() {
  ScenarioSpec spec;
  spec.satellites = 2;
  spec.grids = 2;
  spec.visibility = 1.0;
  spec.beta_lo = 4.0;
  spec.beta_hi = 9.0;
  spec.stage_length = 4;
  spec.horizon_begin = 0;
  spec.horizon_end = 4;
  spec.seed = 5;
  return spec;
}

}  // namespace

TEST_CASE("canonical scenario files round-trip byte-identically") {
  const Scenario scenario = generate_scenario(regional_preset());
  const std::string dir = temp_dir("roundtrip");
  const std::string path = dir + "/scenario.json";
  save_scenario(scenario, path);
  const Scenario loaded = load_scenario(path);
  CHECK(loaded == scenario);
  const std::string again = dir + "/again.json";
  save_scenario(loaded, again);
  CHECK(slurp(path) == slurp(again));
}

TEST_CASE("schema violations are rejected with the offending field") {
  auto base = scenario_to_json(generate_scenario(tiny_spec()));

  auto broken = base;
  broken["load"][0]["beta"] = -2.0;
  CHECK_THROWS_WITH_AS(scenario_from_json(broken), doctest::Contains("beta"),
                       ValidationError);

  broken = base;
  broken["windows"][0]["begin_min"] = 99;
  CHECK_THROWS_AS(scenario_from_json(broken), ValidationError);

  broken = base;
  broken["unexpected"] = 1;
  CHECK_THROWS_WITH_AS(scenario_from_json(broken), doctest::Contains("unknown field"),
                       ValidationError);

  broken = base;
  broken["windows"][0]["sat"] = 42;
  CHECK_THROWS_AS(scenario_from_json(broken), ValidationError);

  broken = base;
  broken["capacity"][0].erase("alpha");
  CHECK_THROWS_WITH_AS(scenario_from_json(broken), doctest::Contains("alpha"),
                       ValidationError);

  CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), IoError);

  const std::string dir = temp_dir("parse");
  std::ofstream(dir + "/bad.json") << "{ not json";
  CHECK_THROWS_AS(load_scenario(dir + "/bad.json"), ValidationError);
}

TEST_CASE("capacity shorthand forms expand deterministically") {
  auto base = scenario_to_json(generate_scenario(tiny_spec()));

  auto with_default = base;
  with_default["capacity"] = {{"default", 2.5}};
  const Scenario expanded = scenario_from_json(with_default);
  for (const auto& [key, alpha] : expanded.capacity) CHECK(alpha == 2.5);
  CHECK(expanded.capacity.size() == 4);  // one per windowed pair

  auto with_range = base;
  with_range["capacity"] = {{"range", {2.0, 3.0}}, {"seed", 9}};
  const Scenario drawn = scenario_from_json(with_range);
  const Scenario drawn_again = scenario_from_json(with_range);
  CHECK(drawn == drawn_again);
  for (const auto& [key, alpha] : drawn.capacity) {
    CHECK(alpha >= 2.0);
    CHECK(alpha <= 3.0);
  }

  auto conflicting = base;
  conflicting["capacity"] = {{"default", 2.0}, {"range", {2.0, 3.0}}};
  CHECK_THROWS_AS(scenario_from_json(conflicting), ValidationError);
}

TEST_CASE("generator presets reproduce the published scales") {
  const Scenario regional = generate_scenario(regional_preset());
  CHECK(regional.satellites.size() == 25);
  CHECK(regional.grids.size() == 9);

  ScenarioSpec global = global_preset();
  const Scenario world = generate_scenario(global);
  CHECK(world.satellites.size() == 100);
  CHECK(world.grids.size() == 30);

  // same seed, same bytes
  ScenarioSpec spec = regional_preset();
  spec.seed = 77;
  const std::string dir = temp_dir("seeded");
  save_scenario(generate_scenario(spec), dir + "/a.json");
  save_scenario(generate_scenario(spec), dir + "/b.json");
  CHECK(slurp(dir + "/a.json") == slurp(dir + "/b.json"));

  // every satellite sees something; every grid is seen
  std::set<SatelliteId> sats;
  std::set<GridId> grids;
  for (const TimeWindow& w : world.windows) {
    sats.insert(w.sat);
    grids.insert(w.grid);
  }
  CHECK(sats.size() == world.satellites.size());
  CHECK(grids.size() == world.grids.size());
}

TEST_CASE("run_experiment statistics are reproducible and self-consistent") {
  const Scenario scenario = generate_scenario(tiny_spec());
  LearnerConfig config;
  config.seed = 3;
  config.schedule.t_max = 80;

  const ExperimentResult single = run_experiment(scenario, config, 1);
  CHECK(single.stats.worst == single.stats.best);
  CHECK(single.stats.worst == single.stats.mean);
  CHECK(single.stats.variance == 0.0);

  const ExperimentResult batch = run_experiment(scenario, config, 12);
  const RunStats recomputed = compute_stats(batch.records, batch.oracle_optimum);
  CHECK(batch.stats.worst == recomputed.worst);
  CHECK(batch.stats.best == recomputed.best);
  CHECK(batch.stats.mean == recomputed.mean);
  CHECK(batch.stats.variance == recomputed.variance);
  CHECK(batch.stats.n_best == recomputed.n_best);
  CHECK(batch.stats.worst >= batch.stats.mean);
  CHECK(batch.stats.mean >= batch.stats.best);

  // the tiny instance is oracle-solvable: n_best counts certified hits
  REQUIRE(batch.oracle_optimum.has_value());
  CHECK(batch.stats.n_best_mode == "oracle");
  int hits = 0;
  for (const RunRecord& r : batch.records)
    if (r.objective <= *batch.oracle_optimum + 1e-9) ++hits;
  CHECK(batch.stats.n_best == hits);

  // parallel fan-out returns identical records (timings aside)
  const ExperimentResult parallel = run_experiment(scenario, config, 12, 4);
  REQUIRE(parallel.records.size() == batch.records.size());
  for (std::size_t r = 0; r < batch.records.size(); ++r) {
    CHECK(parallel.records[r].objective == batch.records[r].objective);
    CHECK(parallel.records[r].seed == batch.records[r].seed);
  }
}

TEST_CASE("emitted files: column order, empty stats, manifest replay") {
  const std::string dir = temp_dir("emit");
  write_summary_csv(dir + "/empty.csv", {});
  CHECK(slurp(dir + "/empty.csv") == "variant,worst,best,mean,time_s,variance,n_best\n");

  const Scenario scenario = generate_scenario(tiny_spec());
  const std::string scenario_path = dir + "/scenario.json";
  save_scenario(scenario, scenario_path);

  LearnerConfig config;
  config.seed = 9;
  config.schedule.t_max = 60;
  const ExperimentResult result = run_experiment(scenario, config, 4);
  const auto manifest = build_manifest("run", scenario_path, config, 4, 1,
                                       result.stats.n_best_mode);
  emit_results(dir + "/out", "setvbrp", result, manifest);

  const std::string summary = slurp(dir + "/out/summary.csv");
  CHECK(summary.rfind("variant,worst,best,mean,time_s,variance,n_best\n", 0) == 0);
  CHECK(summary.find("setvbrp,") != std::string::npos);
  CHECK(std::filesystem::exists(dir + "/out/convergence.csv"));
  CHECK(std::filesystem::exists(dir + "/out/trace_3.csv"));

  // replaying the manifest reproduces summary.csv byte for byte
  std::ifstream manifest_in(dir + "/out/run.json");
  nlohmann::json loaded = nlohmann::json::parse(manifest_in);
  const LearnerConfig replay_config = config_from_manifest(loaded);
  const Scenario replay_scenario = load_scenario(loaded.at("scenario").get<std::string>());
  const ExperimentResult replay =
      run_experiment(replay_scenario, replay_config, loaded.at("runs").get<int>());
  emit_results(dir + "/replay", "setvbrp", replay, manifest);
  CHECK(mask_time_column(slurp(dir + "/replay/summary.csv")) == mask_time_column(summary));
  CHECK(slurp(dir + "/replay/convergence.csv") == slurp(dir + "/out/convergence.csv"));
  CHECK(slurp(dir + "/replay/trace_0.csv") == slurp(dir + "/out/trace_0.csv"));
}
