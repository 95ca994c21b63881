#include "riemann_avg/grassmann_pca.hpp"

#include "riemann_avg/streams.hpp"

namespace ravg {

namespace {

void check_grassmann(const ManifoldPoint& X) {
  if (X.space.kind() != ManifoldKind::Grassmann)
    throw DimensionError("operation requires a Grassmann point");
}

void check_matrix(const ManifoldPoint& X, const Eigen::MatrixXd& H) {
  if (H.rows() != X.space.ambient_dim() || H.cols() != X.space.ambient_dim())
    throw DimensionError("matrix shape does not match the ambient dimension");
}

Eigen::MatrixXd riemannian_grad_raw(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Hn) {
  Eigen::MatrixXd hx = Hn * X;
  return -(hx - X * (X.transpose() * hx));
}

}  // namespace

PcaProblem PcaProblem::from_covariance(const Eigen::MatrixXd& H, int k) {
  const int d = static_cast<int>(H.rows());
  if (H.cols() != d) throw DimensionError("covariance must be square");
  if (k < 1 || k >= d) throw DimensionError("require 1 <= k < d");
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw DomainError("covariance must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  Eigen::VectorXd evals = es.eigenvalues().reverse();
  Eigen::MatrixXd evecs = es.eigenvectors().rowwise().reverse();
  if (evals(k - 1) - evals(k) <= 1e-12)
    throw DomainError("eigengap at k vanishes; top-k subspace ill-defined");
  ManifoldPoint x_star(Manifold::grassmann(d, k), evecs.leftCols(k));
  return {H, k, std::move(evals), std::move(x_star)};
}

double rayleigh_value(const ManifoldPoint& X, const Eigen::MatrixXd& H) {
  check_grassmann(X);
  check_matrix(X, H);
  return -0.5 * (X.coords.transpose() * H * X.coords).trace();
}

TangentVector riemannian_grad(const ManifoldPoint& X, const Eigen::MatrixXd& Hn) {
  check_grassmann(X);
  check_matrix(X, Hn);
  return {X, riemannian_grad_raw(X.coords, Hn)};
}

TangentVector hessian_apply(const ManifoldPoint& x_star, const Eigen::MatrixXd& H,
                            const TangentVector& delta) {
  check_grassmann(x_star);
  check_matrix(x_star, H);
  const Eigen::MatrixXd& X = x_star.coords;
  const Eigen::MatrixXd& D = delta.vec;
  if (D.rows() != X.rows() || D.cols() != X.cols())
    throw DimensionError("tangent shape mismatch");
  if ((X.transpose() * D).cwiseAbs().maxCoeff() > 1e-8)
    throw DomainError("Delta is not tangent at x_star");
  Eigen::MatrixXd hd = H * D;
  Eigen::MatrixXd out = D * (X.transpose() * H * X) - (hd - X * (X.transpose() * hd));
  return {x_star, out - X * (X.transpose() * out)};
}

ManifoldPoint power_update(const ManifoldPoint& X, const Eigen::MatrixXd& Hn,
                           double gamma) {
  check_grassmann(X);
  check_matrix(X, Hn);
  if (gamma <= 0) throw DomainError("power update requires gamma > 0");
  return retract_raw(X, gamma * (Hn * X.coords));
}

Eigen::MatrixXd oja_update(const ManifoldPoint& X, const Eigen::MatrixXd& Hn,
                           double gamma) {
  check_grassmann(X);
  check_matrix(X, Hn);
  return X.coords - gamma * riemannian_grad_raw(X.coords, Hn);
}

Eigen::MatrixXd yang_update(const ManifoldPoint& X, const Eigen::MatrixXd& Hn,
                            double gamma) {
  check_grassmann(X);
  check_matrix(X, Hn);
  const Eigen::MatrixXd& x = X.coords;
  Eigen::MatrixXd hx = Hn * x;
  return x + gamma * (2.0 * hx - x * (x.transpose() * hx) - Hn * x * (x.transpose() * x));
}

ManifoldPoint rsgd_update(const ManifoldPoint& X, const Eigen::MatrixXd& Hn,
                          double gamma) {
  check_grassmann(X);
  check_matrix(X, Hn);
  return retract_raw(X, -gamma * riemannian_grad_raw(X.coords, Hn));
}

ManifoldPoint pca_average_power(const ManifoldPoint& x_tilde, const ManifoldPoint& x_n,
                                std::int64_t n) {
  check_grassmann(x_tilde);
  if (x_tilde.space != x_n.space) throw DimensionError("frames on different Grassmannians");
  if (n < 1) throw DomainError("averaging step index must be >= 1");
  const Eigen::MatrixXd& Xn = x_n.coords;
  Eigen::MatrixXd step = Xn * (Xn.transpose() * x_tilde.coords) / static_cast<double>(n);
  return retract_raw(x_tilde, step);
}

ManifoldPoint pca_average_retraction(const ManifoldPoint& x_tilde,
                                     const ManifoldPoint& x_n, std::int64_t n) {
  check_grassmann(x_tilde);
  if (n < 1) throw DomainError("averaging step index must be >= 1");
  TangentVector displacement = inverse_retract(x_tilde, x_n);
  return retract(x_tilde, TangentVector(x_tilde, displacement.vec / static_cast<double>(n)));
}

double squared_frobenius_error(const ManifoldPoint& X, const ManifoldPoint& x_star) {
  double d = subspace_distances(X, x_star).frobenius;
  return d * d;
}

PcaRunResult run_streaming_pca(const MatrixStream& stream, const PcaProblem& problem,
                               const StepSchedule& schedule, std::int64_t n_iters,
                               std::uint64_t replicate_index, PcaUpdateRule update_rule,
                               PcaAverageRule average_rule, int record_every) {
  MatrixStream s = stream.with_stream(replicate_index);
  if (s.dim() != problem.dim())
    throw DimensionError("stream dimension does not match the problem");

  auto grid = record_grid(n_iters, record_every);

  ManifoldPoint x = retract(problem.x_star, random_tangent(problem.x_star, s.rng, 0.1));
  ManifoldPoint x_avg = x;

  Trajectory traj;
  traj.seed = s.seed;
  traj.metric_id = "sq_frobenius_subspace_dist";

  std::size_t next_record = 0;
  auto record = [&](std::int64_t n, double gamma) {
    traj.iters.push_back(n);
    traj.gamma.push_back(gamma);
    traj.err_sgd.push_back(squared_frobenius_error(x, problem.x_star));
    traj.err_avg.push_back(squared_frobenius_error(x_avg, problem.x_star));
  };
  record(0, 0.0);
  ++next_record;

  for (std::int64_t n = 1; n <= n_iters; ++n) {
    double gamma = step_size(schedule, n);
    Eigen::MatrixXd Hn = sample_stream(s);
    x = update_rule == PcaUpdateRule::Power ? power_update(x, Hn, gamma)
                                            : rsgd_update(x, Hn, gamma);
    try {
      x_avg = average_rule == PcaAverageRule::PowerAvg
                  ? pca_average_power(x_avg, x, n)
                  : pca_average_retraction(x_avg, x, n);
    } catch (const DomainError& e) {
      throw AveragingDomainError(n, e.what());
    } catch (const SingularityError& e) {
      throw AveragingDomainError(n, e.what());
    }
    if (next_record < grid.size() && grid[next_record] == n) {
      record(n, gamma);
      ++next_record;
    }
  }
  return {std::move(traj), std::move(x), std::move(x_avg)};
}

EigengapReport eigengap_of_average(const std::vector<ManifoldPoint>& frames) {
  if (frames.empty()) throw DomainError("need at least one frame");
  const Manifold& space = frames.front().space;
  if (space.kind() != ManifoldKind::Grassmann)
    throw DimensionError("eigengap report requires Grassmann frames");
  const int d = space.ambient_dim();
  const int k = space.subspace_dim();
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(d, d);
  for (const auto& f : frames) {
    if (f.space != space) throw DimensionError("frames on different Grassmannians");
    mean.noalias() += f.coords * f.coords.transpose();
  }
  mean /= static_cast<double>(frames.size());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mean);
  Eigen::VectorXd spectrum = es.eigenvalues().reverse();
  return {spectrum(k - 1) - spectrum(k), std::move(spectrum)};
}

}  // namespace ravg
