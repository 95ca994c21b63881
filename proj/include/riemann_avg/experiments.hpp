#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "riemann_avg/oracles.hpp"
#include "riemann_avg/schedule.hpp"
#include "riemann_avg/sphere_mean.hpp"
#include "riemann_avg/streams.hpp"
#include "riemann_avg/trajectory.hpp"

namespace ravg {

enum class ExperimentKind {
  PcaConditioning,
  PcaStepRobustness,
  SphereMean,
  Counterexample,
  CovarianceCheck,
};

/// Parsed, validated experiment description. Unknown JSON keys are rejected;
/// omitted keys fall back to per-experiment defaults.
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::PcaConditioning;
  int d = 50;
  int k = 10;
  std::int64_t n_iters = 1'000'000;
  int replicates = 10;
  std::uint64_t seed = 0;
  std::vector<StepSchedule> schedules;

  // PCA problem source: a spectrum rule or explicit eigenvalues
  std::optional<SpectrumSpec> spectrum;
  std::optional<Eigen::VectorXd> eigenvalues;

  double dispersion = 0.2;  // SphereMean
  PcaUpdateRule update_rule = PcaUpdateRule::Power;
  PcaAverageRule average_rule = PcaAverageRule::PowerAvg;
  int record_every = 20;
  std::int64_t fit_n_min = 0;  // 0 = n_iters / 100, at least 10
  std::string output_dir;

  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_json_file(const std::string& path);
};

/// Execute a validated config, writing one CSV per (schedule, replicate)
/// plus summary.txt and metadata.json into output_dir. Throws on failure.
void run_experiment(const ExperimentConfig& config, int workers);

/// CLI entry points; diagnostics go to stderr. Exit codes: 0 success,
/// 2 invalid config or malformed input, 3 runtime failure (averaging-domain
/// aborts carry the iteration index).
int cmd_run(const std::string& config_path, int workers);
int cmd_report(const std::string& csv_dir);

void write_trajectory_csv(const Trajectory& traj, const std::string& path);
Trajectory read_trajectory_csv(const std::string& path);

/// Default lower fit bound for slope reporting.
std::int64_t auto_fit_n_min(std::int64_t max_n);

}  // namespace ravg
