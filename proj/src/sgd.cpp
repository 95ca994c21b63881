#include "riemann_avg/sgd.hpp"

namespace ravg {

namespace {

ManifoldPoint forward_map(const ManifoldPoint& x, const TangentVector& v, MapKind map) {
  return map == MapKind::Exponential ? exp_map(x, v) : retract(x, v);
}

TangentVector backward_map(const ManifoldPoint& x, const ManifoldPoint& y, MapKind map) {
  return map == MapKind::Exponential ? log_map(x, y) : inverse_retract(x, y);
}

}  // namespace

ManifoldPoint sgd_step(const ManifoldPoint& x, const TangentVector& g, double gamma,
                       MapKind map) {
  TangentVector step(x, -gamma * g.vec);
  return forward_map(x, step, map);
}

ManifoldPoint streaming_average_step(const ManifoldPoint& x_tilde_prev,
                                     const ManifoldPoint& x_n, std::int64_t n,
                                     MapKind map) {
  if (n < 1) throw DomainError("averaging step index must be >= 1");
  TangentVector displacement = backward_map(x_tilde_prev, x_n, map);
  TangentVector step(x_tilde_prev, displacement.vec / static_cast<double>(n));
  return forward_map(x_tilde_prev, step, map);
}

Trajectory run_sgd(const GradientOracle& problem, const ManifoldPoint& x0,
                   const RunConfig& config, const IterationObserver& observer) {
  auto grid = record_grid(config.n_iters, config.record_every);

  Trajectory traj;
  traj.seed = config.seed;
  traj.metric_id = problem.metric_id();

  RngStream rng(config.seed, config.stream_index);
  ManifoldPoint x = x0;
  ManifoldPoint x_avg = x0;  // the average is seeded at the initial point

  std::size_t next_record = 0;
  auto record = [&](std::int64_t n, double gamma) {
    traj.iters.push_back(n);
    traj.gamma.push_back(gamma);
    traj.err_sgd.push_back(problem.squared_error(x));
    traj.err_avg.push_back(problem.squared_error(x_avg));
  };
  record(0, 0.0);
  ++next_record;

  for (std::int64_t n = 1; n <= config.n_iters; ++n) {
    double gamma = step_size(config.schedule, n);
    TangentVector g = problem.sample(x, rng);
    x = sgd_step(x, g, gamma, config.map);
    try {
      x_avg = streaming_average_step(x_avg, x, n, config.map);
    } catch (const DomainError& e) {
      throw AveragingDomainError(n, e.what());
    }
    if (observer) observer(n, x, x_avg);
    if (next_record < grid.size() && grid[next_record] == n) {
      record(n, gamma);
      ++next_record;
    }
  }
  return traj;
}

EuclideanQuadraticOracle::EuclideanQuadraticOracle(ManifoldPoint x_star,
                                                   Eigen::MatrixXd noise_cov)
    : x_star_(std::move(x_star)), noise_sqrt_(Eigen::MatrixXd()) {
  if (x_star_.space.kind() != ManifoldKind::Euclidean)
    throw DimensionError("quadratic oracle requires a Euclidean optimum");
  const int d = x_star_.space.ambient_dim();
  if (noise_cov.rows() != d || noise_cov.cols() != d)
    throw DimensionError("noise covariance shape mismatch");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(noise_cov);
  if (es.eigenvalues().minCoeff() < 0)
    throw DomainError("noise covariance must be positive semi-definite");
  noise_sqrt_ = es.eigenvectors() *
                es.eigenvalues().cwiseSqrt().asDiagonal() *
                es.eigenvectors().transpose();
}

TangentVector EuclideanQuadraticOracle::sample(const ManifoldPoint& x,
                                               RngStream& rng) const {
  Eigen::MatrixXd noise = noise_sqrt_ * rng.normal_vector(x.space.ambient_dim());
  return {x, x.coords - x_star_.coords + noise};
}

std::optional<TangentVector> EuclideanQuadraticOracle::exact_gradient(
    const ManifoldPoint& x) const {
  return TangentVector(x, x.coords - x_star_.coords);
}

}  // namespace ravg
