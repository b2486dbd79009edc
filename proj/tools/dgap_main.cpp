#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dgap/errors.hpp"
#include "dgap/experiment.hpp"
#include "dgap/learning.hpp"
#include "dgap/model.hpp"
#include "dgap/multistage.hpp"
#include "dgap/oracle.hpp"
#include "dgap/potential.hpp"
#include "dgap/scenario_io.hpp"

namespace {

constexpr const char* kVersion = "dgap 0.1.0";

struct CommonRunOptions {
  std::string scenario_path;
  std::string variant = "setvbrp";
  std::string out_dir = "out";
  int runs = 50;
  int jobs = 1;
  std::uint64_t seed = 1;
  bool early_stop = false;
  bool warm_start = false;
  dgap::ScheduleParams schedule;
  double theta = 0.2;
  std::size_t action_cap = dgap::kDefaultActionCap;
  double oracle_cap = dgap::kDefaultJointCap;
};

void add_run_options(CLI::App* cmd, CommonRunOptions& opt) {
  cmd->add_option("--scenario", opt.scenario_path, "scenario JSON file")->required();
  cmd->add_option("--variant", opt.variant, "setvbrp|tvbrp|sebrp|brp|bra")
      ->check(CLI::IsMember({"setvbrp", "tvbrp", "sebrp", "brp", "bra"}));
  cmd->add_option("--runs", opt.runs, "number of seeded runs");
  cmd->add_option("--tmax", opt.schedule.t_max, "iterations per run");
  cmd->add_option("--tau", opt.schedule.tau, "fraction of tmax before epsilon decays");
  cmd->add_option("--theta", opt.theta, "inertia probability");
  cmd->add_option("--seed", opt.seed, "base seed; run r uses seed + r");
  cmd->add_option("--eps-u", opt.schedule.eps_upper, "upper smoothing epsilon");
  cmd->add_option("--eps-l", opt.schedule.eps_lower, "lower smoothing epsilon");
  cmd->add_option("--xi", opt.schedule.xi, "epsilon decay per iteration");
  cmd->add_option("--phi", opt.schedule.phi_ratio, "omega growth per iteration");
  cmd->add_option("--omega-l", opt.schedule.omega_lower, "lower sampling ratio");
  cmd->add_option("--omega-u", opt.schedule.omega_upper, "upper sampling ratio");
  cmd->add_option("--jobs", opt.jobs, "parallel runs (timings are only comparable at 1)");
  cmd->add_option("--cap", opt.action_cap, "per-satellite action enumeration cap");
  cmd->add_option("--oracle-cap", opt.oracle_cap, "joint-space cap for the exact baseline");
  cmd->add_flag("--early-stop", opt.early_stop, "stop once a full sweep certifies a Nash profile");
  cmd->add_option("-o,--out", opt.out_dir, "output directory");
}

dgap::LearnerConfig config_of(const CommonRunOptions& opt) {
  dgap::LearnerConfig config;
  const auto variant = dgap::parse_variant(opt.variant);
  if (!variant) throw dgap::ValidationError("unknown variant: " + opt.variant);
  config.variant = *variant;
  config.schedule = opt.schedule;
  config.inertia = opt.theta;
  config.seed = opt.seed;
  config.early_stop = opt.early_stop;
  config.warm_start = opt.warm_start;
  config.action_cap = opt.action_cap;
  return config;
}

void print_stats(const std::string& label, const dgap::RunStats& s) {
  std::printf("%-10s worst=%-8.4g best=%-8.4g mean=%-8.4g time=%.4gs var=%-8.4g n_best=%d (%s)\n",
              label.c_str(), s.worst, s.best, s.mean, s.time_mean_s, s.variance, s.n_best,
              s.n_best_mode.c_str());
}

int cmd_generate(const std::string& preset, int n, int m, std::uint64_t seed,
                 double visibility, const std::vector<double>& growth, int horizon_len,
                 int dt, int transfer_penalty, const std::string& out_path) {
  dgap::ScenarioSpec spec =
      preset == "global" ? dgap::global_preset() : dgap::regional_preset();
  if (n > 0) spec.satellites = n;
  if (m > 0) spec.grids = m;
  if (visibility > 0) spec.visibility = visibility;
  if (horizon_len > 0) spec.horizon_end = spec.horizon_begin + horizon_len;
  if (dt > 0) spec.stage_length = dt;
  if (transfer_penalty >= 0) spec.transfer_penalty = transfer_penalty;
  spec.load_growth = growth;
  spec.seed = seed;
  const dgap::Scenario scenario = dgap::generate_scenario(spec);
  dgap::save_scenario(scenario, out_path);
  std::printf("wrote %s: %zu satellites, %zu grids, %zu windows\n", out_path.c_str(),
              scenario.satellites.size(), scenario.grids.size(), scenario.windows.size());
  return 0;
}

int cmd_run(const CommonRunOptions& opt) {
  const dgap::Scenario scenario = dgap::load_scenario(opt.scenario_path);
  const dgap::LearnerConfig config = config_of(opt);
  const auto result = dgap::run_experiment(scenario, config, opt.runs, opt.jobs, opt.oracle_cap);
  const auto manifest = dgap::build_manifest("run", opt.scenario_path, config, opt.runs,
                                             opt.jobs, result.stats.n_best_mode);
  dgap::emit_results(opt.out_dir, opt.variant, result, manifest);
  print_stats(opt.variant, result.stats);
  if (result.oracle_optimum)
    std::printf("certified optimum: %.10g\n", *result.oracle_optimum);
  std::printf("outputs in %s\n", opt.out_dir.c_str());
  return 0;
}

int cmd_dgap(const CommonRunOptions& opt) {
  const dgap::Scenario scenario = dgap::load_scenario(opt.scenario_path);
  const dgap::LearnerConfig config = config_of(opt);
  const auto result =
      dgap::run_dgap_experiment(scenario, config, opt.runs, opt.jobs, opt.oracle_cap);

  std::error_code ec;
  std::filesystem::create_directories(opt.out_dir, ec);
  if (ec) throw dgap::IoError("cannot create output directory: " + opt.out_dir);
  std::vector<std::pair<std::string, dgap::RunStats>> rows;
  for (const auto& stage : result.per_stage) {
    rows.emplace_back(opt.variant + "/stage" + std::to_string(stage.stage_index), stage.stats);
    print_stats("stage " + std::to_string(stage.stage_index), stage.stats);
    if (stage.mean_oracle_optimum)
      std::printf("  mean certified optimum: %.10g\n", *stage.mean_oracle_optimum);
  }
  dgap::write_summary_csv(opt.out_dir + "/summary.csv", rows);
  // convergence per stage across runs
  for (std::size_t k = 0; k < result.per_stage.size(); ++k) {
    std::vector<std::vector<dgap::StepRecord>> traces;
    for (const auto& run : result.runs) traces.push_back(run.stages[k].trace.steps);
    dgap::write_convergence_csv(
        opt.out_dir + "/convergence_stage" + std::to_string(result.per_stage[k].stage_index) + ".csv",
        traces);
  }
  const auto manifest = dgap::build_manifest("dgap", opt.scenario_path, config, opt.runs,
                                             opt.jobs, "per_stage");
  dgap::write_manifest(opt.out_dir + "/run.json", manifest);
  std::printf("outputs in %s\n", opt.out_dir.c_str());
  return 0;
}

int cmd_verify(const std::string& scenario_path, double eps, int samples, double cap) {
  const dgap::Scenario scenario = dgap::load_scenario(scenario_path);
  const dgap::StageState stage = dgap::first_active_stage(scenario);
  bool ok = true;
  auto report = [&](bool pass, const std::string& line) {
    std::printf("[%s] %s\n", pass ? "ok" : "FAIL", line.c_str());
    ok = ok && pass;
  };

  const auto oracle = dgap::brute_force_optimum(stage, cap);
  std::printf("joint space: %.0f profiles, optimum %.10g (%zu optimal, %.3gs)\n",
              oracle.joint_space_size, oracle.optimum, oracle.optimal_count,
              oracle.elapsed_seconds);

  dgap::RandomSource rng(7);
  std::vector<dgap::ActionSpace> spaces;
  for (const auto& [sat, grids] : stage.visible_grids)
    spaces.push_back(dgap::enumerate_actions(stage, sat));

  double worst_gap = 0.0;
  bool ordered = true;
  for (int i = 0; i < 200; ++i) {
    dgap::AllocationFile profile;
    for (const auto& space : spaces)
      profile.actions[space.owner] = space.actions[rng.below(space.actions.size())];
    for (double e : {0.1, 1.0, 15.4}) {
      const auto bound = dgap::sandwich_bound_check(stage, profile, e);
      ordered = ordered && bound.lower <= bound.middle + 1e-9 &&
                bound.middle <= bound.upper + 1e-9;
    }
    const double obj = dgap::objective(stage, profile);
    worst_gap = std::max(worst_gap, oracle.optimum - obj);  // soundness: optimum <= obj
  }
  report(ordered, "log-sum-exp sandwich ordered on 200 random profiles");
  report(worst_gap <= 1e-9, "exact optimum is a lower bound on sampled profiles");

  const double deviation = dgap::check_exact_potential(stage, eps, samples, rng);
  report(deviation <= 1e-9,
         "exact-potential identity, worst relative deviation " + std::to_string(deviation));

  const auto smooth = dgap::brute_force_smooth_optimum(stage, eps, cap);
  const auto& best = smooth.optimal_profiles.front();
  report(dgap::is_nash_equilibrium(stage, best, eps), "smoothed optimum is a Nash profile");
  const double gap = dgap::objective(stage, best) - oracle.optimum;
  const double limit = eps * std::log(static_cast<double>(stage.beta.size()));
  report(gap >= -1e-9 && gap <= limit + 1e-9,
         "approximation gap " + std::to_string(gap) + " within eps*log(m) = " +
             std::to_string(limit));

  const auto greedy = dgap::greedy_init(stage);
  bool greedy_ok = true;
  try {
    dgap::validate_allocation(stage, greedy);
  } catch (const dgap::ValidationError&) {
    greedy_ok = false;
  }
  report(greedy_ok, "greedy initial file is feasible");
  return ok ? 0 : 1;
}

int cmd_sweep(const CommonRunOptions& opt, const std::string& param, double from, double to,
              double step) {
  if (step <= 0) throw dgap::ValidationError("sweep: step must be positive");
  const dgap::Scenario scenario = dgap::load_scenario(opt.scenario_path);
  std::error_code ec;
  std::filesystem::create_directories(opt.out_dir, ec);
  if (ec) throw dgap::IoError("cannot create output directory: " + opt.out_dir);
  const std::string path = opt.out_dir + "/sweep.csv";
  std::ofstream out(path);
  if (!out) throw dgap::IoError("cannot write file: " + path);
  out << "param,value,worst,best,mean,time_s,variance,n_best\n";

  const int points = static_cast<int>(std::floor((to - from) / step + 1e-9)) + 1;
  for (int idx = 0; idx < points; ++idx) {
    const double v = std::min(from + idx * step, to);
    CommonRunOptions point = opt;
    if (param == "tau")
      point.schedule.tau = v;
    else if (param == "theta")
      point.theta = v;
    else if (param == "xi")
      point.schedule.xi = v;
    else if (param == "phi")
      point.schedule.phi_ratio = v;
    else
      throw dgap::ValidationError("sweep: unsupported parameter '" + param + "'");
    const auto result =
        dgap::run_experiment(scenario, config_of(point), opt.runs, opt.jobs, opt.oracle_cap);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    out << param << ',' << buf << ',' << result.stats.worst << ',' << result.stats.best
        << ',' << result.stats.mean << ',' << result.stats.time_mean_s << ','
        << result.stats.variance << ',' << result.stats.n_best << '\n';
    std::printf("%s=%-8.4g mean=%-8.4g best=%.4g\n", param.c_str(), v, result.stats.mean,
                result.stats.best);
  }
  if (!out) throw dgap::IoError("write failed: " + path);
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"potential-game allocation engine for satellite observation scheduling"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // generate
  std::string preset = "regional", gen_out = "scenario.json";
  int gen_n = 0, gen_m = 0, gen_horizon = 0, gen_dt = 0, gen_h = -1;
  double gen_visibility = 0.0;
  std::uint64_t gen_seed = 0;
  std::vector<double> gen_growth;
  auto* generate = app.add_subcommand("generate", "write a synthetic scenario");
  generate->add_option("--preset", preset, "regional (25x9) or global (100x30)")
      ->check(CLI::IsMember({"regional", "global"}));
  generate->add_option("--n", gen_n, "override satellite count");
  generate->add_option("--m", gen_m, "override grid count");
  generate->add_option("--seed", gen_seed, "generator seed");
  generate->add_option("--visibility", gen_visibility, "per-pair window probability");
  generate->add_option("--horizon", gen_horizon, "horizon length in minutes");
  generate->add_option("--dt", gen_dt, "stage length in minutes");
  generate->add_option("--transfer-penalty", gen_h, "slewing penalty H in minutes");
  generate->add_option("--growth", gen_growth, "per-stage load growth factors");
  generate->add_option("-o,--out", gen_out, "output file")->required();

  CommonRunOptions run_opt;
  auto* run = app.add_subcommand("run", "single-stage experiment batch");
  add_run_options(run, run_opt);

  CommonRunOptions dgap_opt;
  auto* dgap_cmd = app.add_subcommand("dgap", "chained multi-stage experiment batch");
  add_run_options(dgap_cmd, dgap_opt);
  dgap_cmd->add_flag("--warm-start", dgap_opt.warm_start,
                     "seed each stage with the previous stage's file");

  std::string verify_scenario;
  double verify_eps = 1.0, verify_cap = dgap::kDefaultJointCap;
  int verify_samples = 2000;
  auto* verify = app.add_subcommand("verify", "exact oracle plus property checks");
  verify->add_option("--scenario", verify_scenario, "scenario JSON file")->required();
  verify->add_option("--eps", verify_eps, "smoothing epsilon for the checks");
  verify->add_option("--samples", verify_samples, "exact-potential sample count");
  verify->add_option("--cap", verify_cap, "joint-space cap");

  CommonRunOptions sweep_opt;
  sweep_opt.runs = 10;
  std::string sweep_param = "tau";
  double sweep_from = 0.0, sweep_to = 1.0, sweep_step = 0.05;
  auto* sweep = app.add_subcommand("sweep", "mean objective across a parameter range");
  add_run_options(sweep, sweep_opt);
  sweep->add_option("--param", sweep_param, "tau|theta|xi|phi");
  sweep->add_option("--from", sweep_from, "first value");
  sweep->add_option("--to", sweep_to, "last value");
  sweep->add_option("--step", sweep_step, "increment");

  try {
    app.parse(argc, argv);
    if (generate->parsed())
      return cmd_generate(preset, gen_n, gen_m, gen_seed, gen_visibility, gen_growth,
                          gen_horizon, gen_dt, gen_h, gen_out);
    if (run->parsed()) return cmd_run(run_opt);
    if (dgap_cmd->parsed()) return cmd_dgap(dgap_opt);
    if (verify->parsed())
      return cmd_verify(verify_scenario, verify_eps, verify_samples, verify_cap);
    if (sweep->parsed())
      return cmd_sweep(sweep_opt, sweep_param, sweep_from, sweep_to, sweep_step);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  } catch (const dgap::CapacityError& e) {
    std::fprintf(stderr, "capacity error: %s\n", e.what());
    return 2;
  } catch (const dgap::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 3;
  } catch (const dgap::ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
