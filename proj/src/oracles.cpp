#include "riemann_avg/oracles.hpp"

#include <cmath>
#include <memory>
#include <mutex>

#include "riemann_avg/parallel.hpp"

namespace ravg {

CovariancePrediction pca_asymptotic_covariance(const PcaProblem& problem, double kappa) {
  return pca_asymptotic_covariance(problem.eigvals, problem.k, kappa);
}

CovariancePrediction pca_asymptotic_covariance(const Eigen::VectorXd& lambda, int k,
                                               double kappa) {
  if (kappa <= 0) throw DomainError("kappa must be positive");
  const int d = static_cast<int>(lambda.size());
  if (k < 1 || k > d) throw DimensionError("require 1 <= k <= d");
  const int m = (d - k) * k;  // tangent dimension
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(m, m);
  double trace = 0;
  for (int j = 0; j < k; ++j) {
    for (int i = k; i < d; ++i) {
      double gap = lambda(j) - lambda(i);
      if (gap == 0.0)
        throw DomainError("zero eigengap between lambda_" + std::to_string(j + 1) +
                          " and lambda_" + std::to_string(i + 1));
      double value = kappa * lambda(i) * lambda(j) / (gap * gap);
      int idx = j * (d - k) + (i - k);
      c(idx, idx) = value;
      trace += value;
    }
  }
  return {std::move(c), trace};
}

double sandwich_trace(const Eigen::VectorXd& hessian_eigs,
                      const Eigen::VectorXd& sigma_diag) {
  if (hessian_eigs.size() != sigma_diag.size())
    throw DimensionError("hessian and noise spectra must have equal length");
  double total = 0;
  for (int i = 0; i < hessian_eigs.size(); ++i) {
    if (hessian_eigs(i) <= 0)
      throw DomainError("hessian eigenvalue " + std::to_string(i + 1) +
                        " is not positive");
    total += sigma_diag(i) / (hessian_eigs(i) * hessian_eigs(i));
  }
  return total;
}

SlopeFit fit_loglog_slope(const std::vector<std::int64_t>& iters,
                          const std::vector<double>& err, std::int64_t n_min) {
  if (iters.size() != err.size()) throw DimensionError("misaligned trajectory columns");
  n_min = std::max<std::int64_t>(n_min, 1);
  std::vector<double> xs, ys;
  int excluded = 0;
  for (std::size_t i = 0; i < iters.size(); ++i) {
    if (iters[i] < n_min) continue;
    if (!(err[i] > 0)) {
      ++excluded;
      continue;
    }
    xs.push_back(std::log10(static_cast<double>(iters[i])));
    ys.push_back(std::log10(err[i]));
  }
  const int n = static_cast<int>(xs.size());
  if (n < 8)
    throw FitError("need at least 8 positive points with n >= n_min (" +
                   std::to_string(n) + " available, " + std::to_string(excluded) +
                   " excluded)");
  double sx = 0, sy = 0;
  for (int i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0) throw FitError("fit window contains a single abscissa");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0;
  for (int i = 0; i < n; ++i) {
    double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += r * r;
  }
  fit.r2 = syy == 0 ? 1.0 : 1.0 - ss_res / syy;
  fit.n_points = n;
  fit.n_excluded = excluded;
  return fit;
}

SlopeFit fit_loglog_slope(const Trajectory& traj, TrajField field, std::int64_t n_min) {
  return fit_loglog_slope(traj.iters,
                          field == TrajField::ErrSgd ? traj.err_sgd : traj.err_avg,
                          n_min);
}

CovarianceReport monte_carlo_scaled_error(
    const std::function<double(int)>& squared_error_at_n, std::int64_t n,
    double predicted_trace, int replicates, int workers) {
  if (replicates < 30) throw DomainError("need at least 30 replicates");
  std::vector<double> values;
  values.reserve(replicates);
  int aborted = 0;
  std::mutex mutex;
  parallel_for(replicates, workers, [&](int i) {
    try {
      double v = static_cast<double>(n) * squared_error_at_n(i);
      std::lock_guard<std::mutex> lock(mutex);
      values.push_back(v);
    } catch (const AveragingDomainError&) {
      std::lock_guard<std::mutex> lock(mutex);
      ++aborted;
    }
  });
  if (aborted * 10 > replicates)
    throw DomainError("more than 10% of replicates aborted (" +
                      std::to_string(aborted) + "/" + std::to_string(replicates) + ")");
  const int m = static_cast<int>(values.size());
  double mean = 0;
  for (double v : values) mean += v;
  mean /= m;
  double var = 0;
  for (double v : values) var += (v - mean) * (v - mean);
  var = m > 1 ? var / (m - 1) : 0.0;
  CovarianceReport report;
  report.trace_predicted = predicted_trace;
  report.trace_empirical = mean;
  report.stderr_ = std::sqrt(var / m);
  report.n_used = n;
  report.replicates = m;
  report.aborted = aborted;
  return report;
}

std::function<double(int)> pca_scaled_error_fn(const MatrixStream& stream,
                                               const PcaProblem& problem,
                                               const StepSchedule& schedule,
                                               std::int64_t n_iters,
                                               PcaUpdateRule update_rule,
                                               PcaAverageRule average_rule) {
  return [=](int replicate) {
    auto result = run_streaming_pca(stream, problem, schedule, n_iters,
                                    static_cast<std::uint64_t>(replicate), update_rule,
                                    average_rule, /*record_every=*/1);
    return inverse_retract(problem.x_star, result.x_avg_final).vec.squaredNorm();
  };
}

std::function<double(int)> euclidean_quadratic_scaled_error_fn(
    const ManifoldPoint& x_star, const Eigen::MatrixXd& noise_cov,
    const ManifoldPoint& x0, const StepSchedule& schedule, std::int64_t n_iters,
    std::uint64_t seed) {
  auto oracle = std::make_shared<EuclideanQuadraticOracle>(x_star, noise_cov);
  return [=](int replicate) {
    RunConfig config;
    config.schedule = schedule;
    config.n_iters = n_iters;
    config.seed = seed;
    config.stream_index = static_cast<std::uint64_t>(replicate);
    config.record_every = 1;  // only the final row is needed
    Trajectory traj = run_sgd(*oracle, x0, config);
    return traj.err_avg.back();
  };
}

}  // namespace ravg
