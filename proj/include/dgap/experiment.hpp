#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dgap/learning.hpp"
#include "dgap/multistage.hpp"
#include "dgap/oracle.hpp"
#include "dgap/types.hpp"

namespace dgap {

struct RunRecord {
  int run_index{};
  std::uint64_t seed{};
  double objective{};
  double wall_seconds{};
  int iterations{};
  bool nash_certified{};
  int last_improvement{};
};

/// Summary over a batch of runs. n_best counts runs matching the certified
/// optimum when one is available, otherwise runs matching the best value
/// observed; n_best_mode records which. variance is the population variance.
struct RunStats {
  double worst{};
  double best{};
  double mean{};
  double variance{};
  double time_mean_s{};
  int n_best{};
  std::string n_best_mode{"best_observed"};
};

RunStats compute_stats(const std::vector<RunRecord>& records,
                       std::optional<double> oracle_optimum);

struct ExperimentResult {
  RunStats stats;
  std::vector<RunRecord> records;
  std::vector<std::vector<StepRecord>> traces;
  std::optional<double> oracle_optimum;
};

/// The stage the single-stage experiments run on: the first stage of the
/// scenario's schedule. Throws if it has no visible pair.
StageState first_active_stage(const Scenario& scenario);

/// `runs` seeded executions (seed, seed+1, ...) of the learner on the first
/// stage. jobs > 1 fans runs out to a thread pool; results are identical,
/// only wall times differ.
ExperimentResult run_experiment(const Scenario& scenario, const LearnerConfig& config,
                                int runs, int jobs = 1,
                                double oracle_cap = kDefaultJointCap);

struct DgapStageStats {
  int stage_index{};
  RunStats stats;
  std::optional<double> mean_oracle_optimum;  // per-run optima averaged (eta varies per run)
};

struct DgapExperimentResult {
  std::vector<DgapStageStats> per_stage;
  std::vector<DgapResult> runs;
};

DgapExperimentResult run_dgap_experiment(const Scenario& scenario,
                                         const LearnerConfig& config, int runs,
                                         int jobs = 1,
                                         double oracle_cap = kDefaultJointCap);

// --- file emission -------------------------------------------------------

void write_summary_csv(const std::string& path,
                       const std::vector<std::pair<std::string, RunStats>>& rows);
void write_trace_csv(const std::string& path, const std::vector<StepRecord>& trace);

/// Per-iteration mean/min/max objective across runs; shorter traces hold
/// their final value.
void write_convergence_csv(const std::string& path,
                           const std::vector<std::vector<StepRecord>>& traces);

void write_manifest(const std::string& path, const nlohmann::json& manifest);

/// Everything needed to re-run bit-identically.
nlohmann::json build_manifest(const std::string& kind, const std::string& scenario_path,
                              const LearnerConfig& config, int runs, int jobs,
                              const std::string& n_best_mode);

/// Inverse of build_manifest for the config part.
LearnerConfig config_from_manifest(const nlohmann::json& manifest);

/// summary.csv + convergence.csv + trace_<r>.csv + run.json under `dir`.
void emit_results(const std::string& dir, const std::string& label,
                  const ExperimentResult& result, const nlohmann::json& manifest);

}  // namespace dgap
