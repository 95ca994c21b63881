#include "riemann_avg/sphere_mean.hpp"

#include <cmath>

namespace ravg {

namespace {
constexpr double kTruncationRadius = M_PI / 4;
}

SphereMeanProblem::SphereMeanProblem(ManifoldPoint center, double dispersion_in)
    : mu(std::move(center)), dispersion(dispersion_in) {
  if (mu.space.kind() != ManifoldKind::Sphere)
    throw DimensionError("center must lie on a sphere");
  if (dispersion <= 0 || dispersion > 0.5)
    throw DomainError("dispersion must lie in (0, 0.5]");
}

ManifoldPoint sample_sphere_point(const SphereMeanProblem& problem, RngStream& rng) {
  for (;;) {
    Eigen::MatrixXd g = rng.normal_matrix(problem.dim(), 1);
    TangentVector xi = project_tangent(problem.mu, problem.dispersion * g);
    if (xi.norm() <= kTruncationRadius) return exp_map(problem.mu, xi);
  }
}

TangentVector frechet_gradient_sample(const ManifoldPoint& x, const ManifoldPoint& z) {
  TangentVector l = log_map(x, z);
  return {x, -l.vec};
}

ManifoldPoint karcher_mean_bruteforce(const std::vector<ManifoldPoint>& points,
                                      double tol) {
  if (points.empty()) throw DomainError("need at least one point");
  if (tol <= 0) throw DomainError("tolerance must be positive");
  ManifoldPoint x = points.front();
  const double inv_n = 1.0 / static_cast<double>(points.size());
  for (int iter = 0; iter < 10'000; ++iter) {
    Eigen::MatrixXd step = Eigen::MatrixXd::Zero(x.space.rows(), 1);
    for (const auto& p : points) step += log_map(x, p).vec;
    step *= inv_n;
    if (step.norm() < tol) return x;
    x = exp_map(x, TangentVector(x, step));
  }
  throw ConvergenceError("Karcher mean iteration did not converge in 10000 steps");
}

TangentVector FrechetMeanOracle::sample(const ManifoldPoint& x, RngStream& rng) const {
  return frechet_gradient_sample(x, sample_sphere_point(problem_, rng));
}

double FrechetMeanOracle::squared_error(const ManifoldPoint& x) const {
  double d = geodesic_distance(x, problem_.mu);
  return d * d;
}

SphereMeanRunResult run_sphere_mean(const SphereMeanProblem& problem,
                                    const StepSchedule& schedule, std::int64_t n_iters,
                                    std::uint64_t seed, std::uint64_t stream_index,
                                    int record_every, int karcher_upto) {
  if (schedule.kind != StepSchedule::Kind::PolynomialDecay || schedule.alpha < 0.5 ||
      schedule.alpha >= 1.0)
    throw DomainError("sphere-mean runs require gamma_n = C n^(-alpha), alpha in [1/2, 1)");

  FrechetMeanOracle oracle(problem);
  RunConfig config;
  config.schedule = schedule;
  config.n_iters = n_iters;
  config.seed = seed;
  config.stream_index = stream_index;
  config.record_every = record_every;
  config.map = MapKind::Exponential;

  // the initial point is a draw from the sampling distribution itself
  RngStream init_rng(seed ^ 0x5bf0'3635'dcd6'6425ULL, stream_index);
  ManifoldPoint x0 = sample_sphere_point(problem, init_rng);

  const ManifoldPoint& x_star = problem.mu;
  std::vector<ManifoldPoint> iterates;
  Eigen::MatrixXd tangent_sum = Eigen::MatrixXd::Zero(problem.dim(), 1);
  std::vector<KarcherCheck> checks;
  IterationObserver observer = [&](std::int64_t n, const ManifoldPoint& x,
                                   const ManifoldPoint&) {
    if (n > karcher_upto) return;
    iterates.push_back(x);
    tangent_sum += log_map(x_star, x).vec;
    ManifoldPoint karcher = karcher_mean_bruteforce(iterates, 1e-12);
    double lhs = log_map(x_star, karcher).vec.squaredNorm();
    double mean_sq = (tangent_sum / static_cast<double>(n)).squaredNorm();
    checks.push_back({n, lhs, 2.0 * mean_sq});
  };

  Trajectory traj = run_sgd(oracle, x0, config, karcher_upto > 0 ? observer : IterationObserver{});
  return {std::move(traj), std::move(checks)};
}

}  // namespace ravg
