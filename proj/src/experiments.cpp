#include "riemann_avg/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "riemann_avg/parallel.hpp"

namespace ravg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void config_fail(const std::string& field, const std::string& message) {
  throw ConfigError("field '" + field + "': " + message);
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      config_fail(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
}

template <typename T>
T require_number(const json& obj, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) config_fail(key, "expected a number");
  return obj[key].get<T>();
}

ExperimentKind parse_experiment(const std::string& name) {
  if (name == "PcaConditioning") return ExperimentKind::PcaConditioning;
  if (name == "PcaStepRobustness") return ExperimentKind::PcaStepRobustness;
  if (name == "SphereMean") return ExperimentKind::SphereMean;
  if (name == "Counterexample") return ExperimentKind::Counterexample;
  if (name == "CovarianceCheck") return ExperimentKind::CovarianceCheck;
  config_fail("experiment", "unknown experiment '" + name + "'");
}

const char* experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::PcaConditioning: return "PcaConditioning";
    case ExperimentKind::PcaStepRobustness: return "PcaStepRobustness";
    case ExperimentKind::SphereMean: return "SphereMean";
    case ExperimentKind::Counterexample: return "Counterexample";
    case ExperimentKind::CovarianceCheck: return "CovarianceCheck";
  }
  return "?";
}

StepSchedule parse_schedule(const json& obj, const std::string& where) {
  if (!obj.is_object()) config_fail(where, "expected an object");
  if (!obj.contains("kind") || !obj["kind"].is_string())
    config_fail(where + ".kind", "expected a string");
  std::string kind = obj["kind"].get<std::string>();
  try {
    if (kind == "Constant") {
      reject_unknown_keys(obj, {"kind", "gamma"}, where);
      if (!obj.contains("gamma")) config_fail(where + ".gamma", "required");
      return StepSchedule::constant(obj["gamma"].get<double>());
    }
    if (kind == "PolynomialDecay") {
      reject_unknown_keys(obj, {"kind", "C", "alpha"}, where);
      if (!obj.contains("C")) config_fail(where + ".C", "required");
      if (!obj.contains("alpha")) config_fail(where + ".alpha", "required");
      return StepSchedule::polynomial(obj["C"].get<double>(), obj["alpha"].get<double>());
    }
  } catch (const DomainError& e) {
    config_fail(where, e.what());
  }
  config_fail(where + ".kind", "expected 'Constant' or 'PolynomialDecay'");
}

SpectrumSpec parse_spectrum(const json& obj, int d, int k, std::uint64_t seed) {
  reject_unknown_keys(obj, {"preset", "alpha", "beta", "eigvecs"}, "spectrum");
  SpectrumSpec spec;
  spec.d = d;
  spec.k = k;
  spec.eigvec_seed = seed;
  if (obj.contains("preset")) {
    if (obj.contains("alpha") || obj.contains("beta"))
      config_fail("spectrum.preset", "preset excludes explicit alpha/beta");
    std::string preset = obj["preset"].get<std::string>();
    if (preset == "well-conditioned") {
      spec.alpha = 1.0;
      spec.beta = 0.2;
    } else if (preset == "poorly-conditioned") {
      spec.alpha = 1.0;
      spec.beta = 0.001;
    } else {
      config_fail("spectrum.preset", "expected 'well-conditioned' or 'poorly-conditioned'");
    }
  } else {
    spec.alpha = require_number<double>(obj, "alpha", 1.0);
    spec.beta = require_number<double>(obj, "beta", 0.2);
  }
  spec.eigvecs = SpectrumSpec::Eigvecs::RandomOrthogonal;
  if (obj.contains("eigvecs")) {
    std::string v = obj["eigvecs"].get<std::string>();
    if (v == "Identity")
      spec.eigvecs = SpectrumSpec::Eigvecs::Identity;
    else if (v == "RandomOrthogonal")
      spec.eigvecs = SpectrumSpec::Eigvecs::RandomOrthogonal;
    else
      config_fail("spectrum.eigvecs", "expected 'Identity' or 'RandomOrthogonal'");
  }
  return spec;
}

std::vector<StepSchedule> default_schedules(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::PcaConditioning:
      return {StepSchedule::constant(0.1), StepSchedule::polynomial(1.0, 0.5),
              StepSchedule::polynomial(1.0, 1.0)};
    case ExperimentKind::PcaStepRobustness:
      return {StepSchedule::polynomial(0.2, 0.5), StepSchedule::polynomial(1.0, 0.5),
              StepSchedule::polynomial(5.0, 0.5)};
    case ExperimentKind::SphereMean:
      return {StepSchedule::polynomial(1.0, 0.5)};
    case ExperimentKind::Counterexample:
      return {StepSchedule::constant(1.0), StepSchedule::polynomial(1.0, 0.5)};
    case ExperimentKind::CovarianceCheck:
      return {StepSchedule::polynomial(1.0, 0.5)};
  }
  return {};
}

}  // namespace

std::int64_t auto_fit_n_min(std::int64_t max_n) {
  return std::max<std::int64_t>(10, max_n / 100);
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown_keys(root,
                      {"experiment", "d", "k", "n_iters", "replicates", "seed",
                       "schedules", "spectrum", "eigenvalues", "dispersion",
                       "update_rule", "average_rule", "record_every", "fit_n_min",
                       "output_dir"},
                      "");

  ExperimentConfig cfg;
  if (!root.contains("experiment") || !root["experiment"].is_string())
    config_fail("experiment", "required string");
  cfg.experiment = parse_experiment(root["experiment"].get<std::string>());
  if (!root.contains("output_dir") || !root["output_dir"].is_string())
    config_fail("output_dir", "required string");
  cfg.output_dir = root["output_dir"].get<std::string>();

  // experiment-specific defaults
  switch (cfg.experiment) {
    case ExperimentKind::PcaConditioning:
    case ExperimentKind::PcaStepRobustness:
      cfg.d = 50; cfg.k = 10; cfg.n_iters = 1'000'000; cfg.replicates = 10;
      break;
    case ExperimentKind::SphereMean:
      cfg.d = 3; cfg.k = 1; cfg.n_iters = 100'000; cfg.replicates = 10;
      break;
    case ExperimentKind::Counterexample:
      cfg.d = 2; cfg.k = 1; cfg.n_iters = 1'000'000; cfg.replicates = 10;
      break;
    case ExperimentKind::CovarianceCheck:
      cfg.d = 2; cfg.k = 1; cfg.n_iters = 100'000; cfg.replicates = 200;
      break;
  }

  cfg.d = require_number<int>(root, "d", cfg.d);
  cfg.k = require_number<int>(root, "k", cfg.k);
  cfg.n_iters = require_number<std::int64_t>(root, "n_iters", cfg.n_iters);
  cfg.replicates = require_number<int>(root, "replicates", cfg.replicates);
  cfg.seed = require_number<std::uint64_t>(root, "seed", 0);
  cfg.dispersion = require_number<double>(root, "dispersion", 0.2);
  cfg.record_every = require_number<int>(root, "record_every", 20);
  cfg.fit_n_min = require_number<std::int64_t>(root, "fit_n_min", 0);

  if (root.contains("schedules")) {
    if (!root["schedules"].is_array() || root["schedules"].empty())
      config_fail("schedules", "expected a non-empty array");
    int i = 0;
    for (const auto& s : root["schedules"])
      cfg.schedules.push_back(parse_schedule(s, "schedules[" + std::to_string(i++) + "]"));
  } else {
    cfg.schedules = default_schedules(cfg.experiment);
  }

  if (root.contains("update_rule")) {
    std::string v = root["update_rule"].get<std::string>();
    if (v == "Power") cfg.update_rule = PcaUpdateRule::Power;
    else if (v == "RSGD") cfg.update_rule = PcaUpdateRule::Rsgd;
    else config_fail("update_rule", "expected 'Power' or 'RSGD'");
  }
  if (root.contains("average_rule")) {
    std::string v = root["average_rule"].get<std::string>();
    if (v == "PowerAvg") cfg.average_rule = PcaAverageRule::PowerAvg;
    else if (v == "RetractionAvg") cfg.average_rule = PcaAverageRule::RetractionAvg;
    else config_fail("average_rule", "expected 'PowerAvg' or 'RetractionAvg'");
  }

  if (root.contains("spectrum") && root.contains("eigenvalues"))
    config_fail("eigenvalues", "give either a spectrum rule or explicit eigenvalues");
  if (root.contains("eigenvalues")) {
    if (!root["eigenvalues"].is_array() || root["eigenvalues"].size() < 2)
      config_fail("eigenvalues", "expected an array with at least two entries");
    Eigen::VectorXd ev(root["eigenvalues"].size());
    int i = 0;
    for (const auto& v : root["eigenvalues"]) {
      if (!v.is_number()) config_fail("eigenvalues", "entries must be numbers");
      ev(i++) = v.get<double>();
    }
    cfg.eigenvalues = ev;
    cfg.d = static_cast<int>(ev.size());
  }

  // validation
  if (cfg.n_iters < 100) config_fail("n_iters", "must be >= 100");
  if (cfg.replicates < 1) config_fail("replicates", "must be >= 1");
  if (cfg.record_every < 1) config_fail("record_every", "must be >= 1");
  if (cfg.fit_n_min < 0) config_fail("fit_n_min", "must be >= 0");
  if (cfg.d < 2) config_fail("d", "must be >= 2");

  const bool pca = cfg.experiment != ExperimentKind::SphereMean;
  if (pca && (cfg.k < 1 || cfg.k >= cfg.d)) config_fail("k", "must satisfy 1 <= k < d");

  std::set<std::string> labels;
  for (const auto& s : cfg.schedules)
    if (!labels.insert(s.label()).second)
      config_fail("schedules", "duplicate schedule " + s.label());

  switch (cfg.experiment) {
    case ExperimentKind::Counterexample:
      if (cfg.d != 2 || cfg.k != 1)
        config_fail("d", "the planar counterexample is fixed at d=2, k=1");
      break;
    case ExperimentKind::SphereMean: {
      if (cfg.dispersion <= 0 || cfg.dispersion > 0.5)
        config_fail("dispersion", "must lie in (0, 0.5]");
      for (const auto& s : cfg.schedules)
        if (s.kind != StepSchedule::Kind::PolynomialDecay || s.alpha < 0.5 || s.alpha >= 1.0)
          config_fail("schedules", "SphereMean requires PolynomialDecay with alpha in [1/2, 1)");
      break;
    }
    case ExperimentKind::PcaConditioning:
    case ExperimentKind::PcaStepRobustness:
    case ExperimentKind::CovarianceCheck:
      break;
  }

  if (pca && !cfg.eigenvalues) {
    json spectrum_obj = root.contains("spectrum") ? root["spectrum"] : json::object();
    if (cfg.experiment == ExperimentKind::Counterexample) {
      if (root.contains("spectrum"))
        config_fail("spectrum", "not applicable to the planar counterexample");
    } else {
      if (cfg.experiment == ExperimentKind::CovarianceCheck && !root.contains("spectrum") &&
          !root.contains("eigenvalues") && cfg.d == 2 && cfg.k == 1) {
        cfg.eigenvalues = Eigen::Vector2d(0.75, 0.25);
      } else {
        cfg.spectrum = parse_spectrum(spectrum_obj, cfg.d, cfg.k, cfg.seed);
        try {
          spectrum_eigenvalues(*cfg.spectrum);
        } catch (const std::exception& e) {
          config_fail("spectrum", e.what());
        }
      }
    }
  }
  if (cfg.eigenvalues) {
    const Eigen::VectorXd& ev = *cfg.eigenvalues;
    for (int i = 1; i < ev.size(); ++i)
      if (ev(i) > ev(i - 1)) config_fail("eigenvalues", "must be non-increasing");
    if (ev.minCoeff() < 0) config_fail("eigenvalues", "must be non-negative");
    if (pca && ev(cfg.k - 1) - ev(cfg.k) <= 1e-12)
      config_fail("eigenvalues", "no eigengap between positions k and k+1");
  }

  return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str());
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << "n,gamma,err_sgd,err_avg\n";
  for (std::size_t i = 0; i < traj.size(); ++i)
    out << traj.iters[i] << ',' << format_g17(traj.gamma[i]) << ','
        << format_g17(traj.err_sgd[i]) << ',' << format_g17(traj.err_avg[i]) << '\n';
}

Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("malformed CSV " + path + ": cannot open");
  auto fail = [&](const std::string& why) -> void {
    throw ConfigError("malformed CSV " + path + ": " + why);
  };
  std::string line;
  if (!std::getline(in, line)) fail("empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "n,gamma,err_sgd,err_avg") fail("unexpected header '" + line + "'");
  Trajectory traj;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<std::string, 4> fields;
    std::size_t start = 0;
    for (int f = 0; f < 4; ++f) {
      std::size_t end = f < 3 ? line.find(',', start) : line.size();
      if (end == std::string::npos) fail("expected 4 columns in row '" + line + "'");
      fields[f] = line.substr(start, end - start);
      start = end + 1;
    }
    try {
      std::size_t pos = 0;
      traj.iters.push_back(std::stoll(fields[0], &pos));
      if (pos != fields[0].size()) fail("bad iteration index '" + fields[0] + "'");
      traj.gamma.push_back(std::stod(fields[1]));
      traj.err_sgd.push_back(std::stod(fields[2]));
      traj.err_avg.push_back(std::stod(fields[3]));
    } catch (const std::logic_error&) {
      fail("non-numeric row '" + line + "'");
    }
  }
  if (traj.iters.empty()) fail("no data rows");
  for (std::size_t i = 1; i < traj.iters.size(); ++i)
    if (traj.iters[i] <= traj.iters[i - 1]) fail("iteration indices not increasing");
  return traj;
}

namespace {

struct RunOutput {
  std::string label;
  int replicate = 0;
  Trajectory traj;
  double final_scaled_sq_error = 0;  // n * ||R^{-1}_{x*}(x_avg)||^2 (PCA only)
};

std::string summary_line(const std::string& label, const std::vector<Trajectory>& reps,
                         std::int64_t fit_n_min) {
  // mean error across replicates at each recorded n, then one slope per curve
  const Trajectory& first = reps.front();
  std::vector<double> mean_sgd(first.size(), 0.0), mean_avg(first.size(), 0.0);
  for (const auto& t : reps)
    for (std::size_t i = 0; i < t.size(); ++i) {
      mean_sgd[i] += t.err_sgd[i] / reps.size();
      mean_avg[i] += t.err_avg[i] / reps.size();
    }
  char buf[256];
  try {
    SlopeFit sgd = fit_loglog_slope(first.iters, mean_sgd, fit_n_min);
    SlopeFit avg = fit_loglog_slope(first.iters, mean_avg, fit_n_min);
    std::snprintf(buf, sizeof(buf),
                  "schedule %s: slope_sgd=%.4f slope_avg=%.4f r2_avg=%.4f "
                  "final_err_sgd=%.6g final_err_avg=%.6g",
                  label.c_str(), sgd.slope, avg.slope, avg.r2, mean_sgd.back(),
                  mean_avg.back());
  } catch (const FitError& e) {
    std::snprintf(buf, sizeof(buf), "schedule %s: fit unavailable (%s)", label.c_str(),
                  e.what());
  }
  return buf;
}

json config_metadata(const ExperimentConfig& cfg) {
  json meta;
  meta["experiment"] = experiment_name(cfg.experiment);
  meta["d"] = cfg.d;
  meta["k"] = cfg.k;
  meta["n_iters"] = cfg.n_iters;
  meta["replicates"] = cfg.replicates;
  meta["seed"] = cfg.seed;
  meta["record_every"] = cfg.record_every;
  json scheds = json::array();
  for (const auto& s : cfg.schedules) scheds.push_back(s.label());
  meta["schedules"] = scheds;
  if (cfg.spectrum) {
    meta["spectrum"]["alpha"] = cfg.spectrum->alpha;
    meta["spectrum"]["beta"] = cfg.spectrum->beta;
    meta["spectrum"]["eigvecs"] =
        cfg.spectrum->eigvecs == SpectrumSpec::Eigvecs::Identity ? "Identity"
                                                                 : "RandomOrthogonal";
    meta["spectrum"]["note"] =
        "library preset values; beta equals the eigengap at k";
  }
  if (cfg.eigenvalues) {
    json ev = json::array();
    for (int i = 0; i < cfg.eigenvalues->size(); ++i) ev.push_back((*cfg.eigenvalues)(i));
    meta["eigenvalues"] = ev;
  }
  if (cfg.experiment == ExperimentKind::SphereMean) meta["dispersion"] = cfg.dispersion;
  if (cfg.experiment != ExperimentKind::SphereMean) {
    meta["update_rule"] = cfg.update_rule == PcaUpdateRule::Power ? "Power" : "RSGD";
    meta["average_rule"] =
        cfg.average_rule == PcaAverageRule::PowerAvg ? "PowerAvg" : "RetractionAvg";
  }
  return meta;
}

void write_text_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << body;
}

}  // namespace

void run_experiment(const ExperimentConfig& cfg, int workers) {
  fs::create_directories(cfg.output_dir);
  const fs::path out_dir(cfg.output_dir);
  const int n_sched = static_cast<int>(cfg.schedules.size());
  const int n_tasks = n_sched * cfg.replicates;
  const std::int64_t fit_n_min =
      cfg.fit_n_min > 0 ? cfg.fit_n_min : auto_fit_n_min(cfg.n_iters);

  std::vector<std::string> extra_summary;
  std::vector<RunOutput> outputs(n_tasks);

  if (cfg.experiment == ExperimentKind::SphereMean) {
    RngStream center_rng(cfg.seed, 0xC0FFEE);
    ManifoldPoint mu = random_point(Manifold::sphere(cfg.d), center_rng);
    SphereMeanProblem problem(mu, cfg.dispersion);
    parallel_for(n_tasks, workers, [&](int task) {
      const int sched_idx = task / cfg.replicates;
      const int rep = task % cfg.replicates;
      auto result = run_sphere_mean(problem, cfg.schedules[sched_idx], cfg.n_iters,
                                    cfg.seed, static_cast<std::uint64_t>(task),
                                    cfg.record_every);
      const std::string label = cfg.schedules[sched_idx].label();
      outputs[task] = {label, rep, std::move(result.traj), 0.0};
      std::ostringstream karcher;
      karcher << "n,karcher_sq,tangent_bound\n";
      for (const auto& check : result.karcher)
        karcher << check.n << ',' << format_g17(check.karcher_sq) << ','
                << format_g17(check.tangent_bound) << '\n';
      write_text_file(out_dir / ("karcher_" + label + "_rep" + std::to_string(rep) + ".csv"),
                      karcher.str());
    });
  } else {
    // build the PCA problem and its stream
    Eigen::MatrixXd H;
    std::optional<PcaProblem> problem;
    if (cfg.experiment == ExperimentKind::Counterexample) {
      H = counterexample_covariance();
      problem = PcaProblem::from_covariance(H, 1);
    } else if (cfg.eigenvalues) {
      H = cfg.eigenvalues->asDiagonal();
      problem = PcaProblem::from_covariance(H, cfg.k);
    } else {
      CovarianceModel model = make_covariance(*cfg.spectrum);
      H = model.H;
      problem = std::move(model.problem);
    }
    MatrixStream proto = cfg.experiment == ExperimentKind::Counterexample
                             ? MatrixStream::counterexample_planar(cfg.seed)
                             : MatrixStream::rank_one_gaussian(H, cfg.seed);

    parallel_for(n_tasks, workers, [&](int task) {
      const int sched_idx = task / cfg.replicates;
      const int rep = task % cfg.replicates;
      auto result = run_streaming_pca(proto, *problem, cfg.schedules[sched_idx],
                                      cfg.n_iters, static_cast<std::uint64_t>(task),
                                      cfg.update_rule, cfg.average_rule, cfg.record_every);
      double scaled = static_cast<double>(cfg.n_iters) *
                      inverse_retract(problem->x_star, result.x_avg_final).vec.squaredNorm();
      outputs[task] = {cfg.schedules[sched_idx].label(), rep, std::move(result.traj), scaled};
    });

    // predicted-vs-empirical covariance traces apply to the rank-one
    // Gaussian streams (kappa = 1), not to the planar counterexample
    if (cfg.experiment != ExperimentKind::Counterexample) {
      double predicted = pca_asymptotic_covariance(*problem, 1.0).trace;
      for (int sched_idx = 0; sched_idx < n_sched; ++sched_idx) {
        double mean = 0, var = 0;
        for (int rep = 0; rep < cfg.replicates; ++rep)
          mean += outputs[sched_idx * cfg.replicates + rep].final_scaled_sq_error;
        mean /= cfg.replicates;
        for (int rep = 0; rep < cfg.replicates; ++rep) {
          double v = outputs[sched_idx * cfg.replicates + rep].final_scaled_sq_error - mean;
          var += v * v;
        }
        var = cfg.replicates > 1 ? var / (cfg.replicates - 1) : 0.0;
        char buf[256];
        std::snprintf(buf, sizeof(buf),
                      "covariance %s: predicted_trace=%.6g empirical_trace=%.6g "
                      "stderr=%.4g replicates=%d n=%lld",
                      cfg.schedules[sched_idx].label().c_str(), predicted, mean,
                      std::sqrt(var / std::max(1, cfg.replicates)), cfg.replicates,
                      static_cast<long long>(cfg.n_iters));
        extra_summary.emplace_back(buf);
      }
    }

    if (cfg.experiment == ExperimentKind::Counterexample) {
      MatrixStream mc = proto.with_stream(static_cast<std::uint64_t>(n_tasks) + 1);
      const int n_samples = 100'000;
      Eigen::Matrix2d mean = Eigen::Matrix2d::Zero();
      for (int i = 0; i < n_samples; ++i) mean += sample_stream(mc);
      mean /= n_samples;
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(mean);
      Eigen::Vector2d claimed = counterexample_claimed_eigenvalues();
      char buf[256];
      std::snprintf(buf, sizeof(buf),
                    "stream_spectrum_mc: l1=%.6g l2=%.6g (samples=%d)",
                    es.eigenvalues()(1), es.eigenvalues()(0), n_samples);
      extra_summary.emplace_back(buf);
      std::snprintf(buf, sizeof(buf), "stream_spectrum_reference: l1=%.6g l2=%.6g",
                    claimed(0), claimed(1));
      extra_summary.emplace_back(buf);
    }
  }

  // per-replicate CSVs
  for (const auto& out : outputs)
    write_trajectory_csv(out.traj,
                         (out_dir / (out.label + "_rep" + std::to_string(out.replicate) +
                                     ".csv")).string());

  // summary with per-schedule slopes of the replicate-mean curves
  std::ostringstream summary;
  summary << "experiment: " << experiment_name(cfg.experiment) << '\n';
  summary << "metric: " << outputs.front().traj.metric_id << '\n';
  summary << "fit_n_min: " << fit_n_min << '\n';
  for (int sched_idx = 0; sched_idx < n_sched; ++sched_idx) {
    std::vector<Trajectory> reps;
    reps.reserve(cfg.replicates);
    for (int rep = 0; rep < cfg.replicates; ++rep)
      reps.push_back(outputs[sched_idx * cfg.replicates + rep].traj);
    summary << summary_line(cfg.schedules[sched_idx].label(), reps, fit_n_min) << '\n';
  }
  for (const auto& line : extra_summary) summary << line << '\n';
  write_text_file(out_dir / "summary.txt", summary.str());
  write_text_file(out_dir / "metadata.json", config_metadata(cfg).dump(2) + "\n");
}

int cmd_run(const std::string& config_path, int workers) {
  ExperimentConfig cfg;
  try {
    cfg = ExperimentConfig::from_json_file(config_path);
    if (const char* env_seed = std::getenv("RIEMANN_AVG_SEED")) {
      try {
        std::size_t pos = 0;
        cfg.seed = std::stoull(env_seed, &pos);
        if (pos != std::string(env_seed).size()) throw std::invalid_argument(env_seed);
      } catch (const std::logic_error&) {
        throw ConfigError(std::string("RIEMANN_AVG_SEED is not an integer: ") + env_seed);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
  try {
    run_experiment(cfg, workers);
  } catch (const AveragingDomainError& e) {
    std::cerr << "run aborted at " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

int cmd_report(const std::string& csv_dir) {
  try {
    if (!fs::is_directory(csv_dir)) throw ConfigError(csv_dir + " is not a directory");
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(csv_dir)) {
      if (!entry.is_regular_file()) continue;
      std::string name = entry.path().filename().string();
      if (name.size() < 4 || name.substr(name.size() - 4) != ".csv") continue;
      if (name.rfind("agg_", 0) == 0 || name.rfind("karcher_", 0) == 0) continue;
      if (name.find("_rep") == std::string::npos) continue;
      names.push_back(name);
    }
    std::sort(names.begin(), names.end());
    if (names.empty()) throw ConfigError("no per-replicate CSV files in " + csv_dir);

    std::map<std::string, std::vector<std::string>> groups;
    for (const auto& name : names) {
      std::size_t pos = name.rfind("_rep");
      groups[name.substr(0, pos)].push_back(name);
    }

    std::ostringstream summary;
    summary << "aggregated replicates per schedule\n";
    for (const auto& [label, files] : groups) {
      Trajectory agg;
      bool first_file = true;
      for (const auto& name : files) {
        Trajectory t = read_trajectory_csv((fs::path(csv_dir) / name).string());
        if (first_file) {
          agg = t;
          std::fill(agg.err_sgd.begin(), agg.err_sgd.end(), 0.0);
          std::fill(agg.err_avg.begin(), agg.err_avg.end(), 0.0);
          first_file = false;
        } else if (t.iters != agg.iters) {
          throw ConfigError("malformed CSV " + name + ": grid differs within group " + label);
        }
        for (std::size_t i = 0; i < t.size(); ++i) {
          agg.err_sgd[i] += t.err_sgd[i] / files.size();
          agg.err_avg[i] += t.err_avg[i] / files.size();
        }
      }
      write_trajectory_csv(agg, (fs::path(csv_dir) / ("agg_" + label + ".csv")).string());
      std::int64_t fit_n_min = auto_fit_n_min(agg.iters.back());
      char buf[256];
      try {
        SlopeFit sgd = fit_loglog_slope(agg, TrajField::ErrSgd, fit_n_min);
        SlopeFit avg = fit_loglog_slope(agg, TrajField::ErrAvg, fit_n_min);
        std::snprintf(buf, sizeof(buf),
                      "schedule %s: replicates=%zu slope_sgd=%.4f slope_avg=%.4f "
                      "r2_avg=%.4f final_err_avg=%.6g",
                      label.c_str(), files.size(), sgd.slope, avg.slope, avg.r2,
                      agg.err_avg.back());
      } catch (const FitError& e) {
        std::snprintf(buf, sizeof(buf), "schedule %s: replicates=%zu fit unavailable (%s)",
                      label.c_str(), files.size(), e.what());
      }
      summary << buf << '\n';
    }
    write_text_file(fs::path(csv_dir) / "report_summary.txt", summary.str());
  } catch (const std::exception& e) {
    std::cerr << "report error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace ravg
