#pragma once

#include <cstdint>
#include <functional>

#include "riemann_avg/grassmann_pca.hpp"
#include "riemann_avg/sgd.hpp"
#include "riemann_avg/streams.hpp"
#include "riemann_avg/trajectory.hpp"

namespace ravg {

struct CovariancePrediction {
  Eigen::MatrixXd C;  // on the tangent basis {v_i e_j^T}, j-major ordering
  double trace;
};

/// Asymptotic covariance of the sqrt(n)-scaled averaged error for streaming
/// PCA with a kappa * delta * delta fourth-moment structure (kappa = 1 for a
/// rank-one Gaussian stream):
///   C = kappa * sum_{j<=k} sum_{i>k} lambda_i lambda_j / (lambda_j-lambda_i)^2
///       (v_i e_j^T) (x) (v_i e_j^T).
CovariancePrediction pca_asymptotic_covariance(const PcaProblem& problem, double kappa);

/// Same formula from a descending spectrum alone; k == d yields the empty sum.
CovariancePrediction pca_asymptotic_covariance(const Eigen::VectorXd& eigvals_desc, int k,
                                               double kappa);

/// tr[A^{-1} Sigma A^{-1}] for co-diagonalizable Hessian/noise:
/// sum_i sigma_i / a_i^2.
double sandwich_trace(const Eigen::VectorXd& hessian_eigs,
                      const Eigen::VectorXd& sigma_diag);

enum class TrajField { ErrSgd, ErrAvg };

struct SlopeFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
  int n_points = 0;
  int n_excluded = 0;  // recorded points in the window with err <= 0
};

/// Least-squares fit of log10(err) against log10(n) over the recorded points
/// with n >= n_min and err > 0; needs at least 8 usable points.
SlopeFit fit_loglog_slope(const Trajectory& traj, TrajField field, std::int64_t n_min);

SlopeFit fit_loglog_slope(const std::vector<std::int64_t>& iters,
                          const std::vector<double>& err, std::int64_t n_min);

struct CovarianceReport {
  double trace_predicted = 0;
  double trace_empirical = 0;
  double stderr_ = 0;
  std::int64_t n_used = 0;
  int replicates = 0;  // replicates that completed
  int aborted = 0;
};

/// Monte Carlo estimate of E[n ||Delta_tilde_n||^2] against a predicted
/// trace. `squared_error_at_n(i)` runs replicate i to iteration n and returns
/// ||R_{x*}^{-1}(x_tilde_n)||^2; replicates that abort with
/// AveragingDomainError are excluded, and more than 10% aborts fails the
/// report.
CovarianceReport monte_carlo_scaled_error(
    const std::function<double(int)>& squared_error_at_n, std::int64_t n,
    double predicted_trace, int replicates, int workers = 1);

/// Replicate runner for the PCA problem: final ||inverse_retract(x*, x_avg)||_F^2.
std::function<double(int)> pca_scaled_error_fn(
    const MatrixStream& stream, const PcaProblem& problem, const StepSchedule& schedule,
    std::int64_t n_iters, PcaUpdateRule update_rule = PcaUpdateRule::Power,
    PcaAverageRule average_rule = PcaAverageRule::PowerAvg);

/// Replicate runner for the Euclidean quadratic sanity problem.
std::function<double(int)> euclidean_quadratic_scaled_error_fn(
    const ManifoldPoint& x_star, const Eigen::MatrixXd& noise_cov,
    const ManifoldPoint& x0, const StepSchedule& schedule, std::int64_t n_iters,
    std::uint64_t seed);

}  // namespace ravg
