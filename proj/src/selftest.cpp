#include "riemann_avg/selftest.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "riemann_avg/oracles.hpp"
#include "riemann_avg/sphere_mean.hpp"

namespace ravg {

namespace {

double lsq_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const int n = static_cast<int>(xs.size());
  double mx = 0, my = 0;
  for (int i = 0; i < n; ++i) {
    mx += xs[i] / n;
    my += ys[i] / n;
  }
  double sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  return sxy / sxx;
}

/// Pair of frames with prescribed principal angles (needs d >= 2k).
std::pair<ManifoldPoint, ManifoldPoint> grassmann_pair(int d, int k,
                                                       const Eigen::VectorXd& theta,
                                                       RngStream& rng) {
  Eigen::MatrixXd q = haar_orthogonal(d, rng);
  Eigen::MatrixXd x = q.leftCols(k);
  Eigen::MatrixXd u = q.middleCols(k, k);
  Eigen::MatrixXd y(d, k);
  for (int j = 0; j < k; ++j)
    y.col(j) = std::cos(theta(j)) * x.col(j) + std::sin(theta(j)) * u.col(j);
  Manifold space = Manifold::grassmann(d, k);
  return {ManifoldPoint(space, x), ManifoldPoint(space, y)};
}

Eigen::MatrixXd random_bounded_symmetric(int d, RngStream& rng) {
  Eigen::MatrixXd g = rng.normal_matrix(d, d);
  Eigen::MatrixXd s = 0.5 * (g + g.transpose());
  return s / s.operatorNorm();  // ||H_n|| <= 1
}

bool check_first_order(const Manifold& space, RngStream& rng) {
  ManifoldPoint x = random_point(space, rng);
  TangentVector xi = random_tangent(x, rng, 1.0);
  std::vector<double> lt, le;
  for (double t : {1e-2, 1e-3, 1e-4, 1e-5}) {
    ManifoldPoint y = retract(x, TangentVector(x, t * xi.vec));
    double err = (y.coords - x.coords - t * xi.vec).norm();
    lt.push_back(std::log10(t));
    le.push_back(std::log10(err));
  }
  return lsq_slope(lt, le) >= 1.9;
}

bool check_second_order(const Manifold& space, RngStream& rng) {
  const double h = 1e-3;
  ManifoldPoint x = random_point(space, rng);
  TangentVector xi = random_tangent(x, rng, 1.0);
  ManifoldPoint fwd = retract(x, TangentVector(x, h * xi.vec));
  ManifoldPoint bwd = retract(x, TangentVector(x, -h * xi.vec));
  Eigen::MatrixXd accel = (fwd.coords - 2.0 * x.coords + bwd.coords) / (h * h);
  return project_tangent(x, accel).norm() <= 1e-4;
}

struct Check {
  std::string name;
  std::function<bool()> fn;
};

}  // namespace

int run_selftest(std::ostream& out) {
  std::vector<Check> checks;

  checks.push_back({"schedule_values", [] {
    bool ok = std::abs(step_size(StepSchedule::polynomial(2.0, 0.5), 4) - 1.0) < 1e-15;
    ok = ok && std::abs(step_size(StepSchedule::polynomial(1.0, 1.0), 10) - 0.1) < 1e-15;
    ok = ok && step_size(StepSchedule::constant(0.05), 7) == 0.05;
    for (int n = 1; n < 50; ++n)
      ok = ok && step_size(StepSchedule::polynomial(1.0, 0.5), n + 1) <
                     step_size(StepSchedule::polynomial(1.0, 0.5), n);
    return ok;
  }});

  checks.push_back({"retraction_first_order", [] {
    RngStream rng(11, 0);
    for (int i = 0; i < 5; ++i) {
      if (!check_first_order(Manifold::sphere(5), rng)) return false;
      if (!check_first_order(Manifold::grassmann(7, 2), rng)) return false;
    }
    return true;
  }});

  checks.push_back({"retraction_second_order", [] {
    RngStream rng(12, 0);
    for (int i = 0; i < 10; ++i) {
      if (!check_second_order(Manifold::sphere(4), rng)) return false;
      if (!check_second_order(Manifold::grassmann(6, 2), rng)) return false;
    }
    return true;
  }});

  checks.push_back({"inverse_consistency", [] {
    RngStream rng(13, 0);
    for (const Manifold& space :
         {Manifold::euclidean(4), Manifold::sphere(4), Manifold::grassmann(6, 2)}) {
      for (int i = 0; i < 10; ++i) {
        ManifoldPoint x = random_point(space, rng);
        TangentVector v = random_tangent(x, rng, 0.5 * rng.uniform());
        TangentVector w = inverse_retract(x, retract(x, v));
        if ((w.vec - v.vec).norm() > 1e-8) return false;
      }
    }
    return true;
  }});

  checks.push_back({"distance_inequality_chain", [] {
    RngStream rng(14, 0);
    for (int i = 0; i < 200; ++i) {
      int k = 1 + static_cast<int>(rng.uniform() * 3);
      int d = 2 * k + static_cast<int>(rng.uniform() * (10 - 2 * k + 1));
      Eigen::VectorXd theta(k);
      for (int j = 0; j < k; ++j) theta(j) = rng.uniform() * M_PI / 4;
      auto [x, y] = grassmann_pair(d, k, theta, rng);
      SubspaceDistances dist = subspace_distances(x, y);
      const double slack = 1e-12;
      if (!(M_PI_2 * dist.retraction >= M_PI_2 * dist.frobenius - slack)) return false;
      if (!(M_PI_2 * dist.frobenius >= dist.arc - slack)) return false;
      if (!(dist.arc >= dist.retraction / std::sqrt(2.0) - slack)) return false;
    }
    return true;
  }});

  checks.push_back({"local_distance_equivalence", [] {
    RngStream rng(15, 0);
    for (int i = 0; i < 50; ++i) {
      Eigen::VectorXd theta(2);
      theta << 4e-3 * rng.uniform(), 4e-3 * rng.uniform();
      auto [x, y] = grassmann_pair(8, 2, theta, rng);
      SubspaceDistances dist = subspace_distances(x, y);
      if (dist.arc > 1e-2) continue;
      if (dist.arc == 0) continue;
      double ratio = dist.retraction / dist.arc;
      if (ratio < 0.99 || ratio > 1.01) return false;
    }
    return true;
  }});

  checks.push_back({"retraction_strong_convexity_k1", [] {
    RngStream rng(16, 0);
    const double h = 1e-3;
    for (int i = 0; i < 50; ++i) {
      ManifoldPoint x_star = random_point(Manifold::grassmann(5, 1), rng);
      ManifoldPoint y = x_star;
      do {
        y = retract(x_star, random_tangent(x_star, rng, 0.3 * rng.uniform()));
      } while (std::abs((x_star.coords.transpose() * y.coords)(0, 0)) < 0.95);
      TangentVector v = random_tangent(y, rng, 1.0);
      auto g = [&](double t) {
        ManifoldPoint z = retract(y, TangentVector(y, t * v.vec));
        return inverse_retract(x_star, z).vec.squaredNorm();
      };
      if ((g(h) - 2.0 * g(0.0) + g(-h)) / (h * h) < 0.0) return false;
    }
    return true;
  }});

  checks.push_back({"update_equivalence_scaling", [] {
    RngStream rng(17, 0);
    for (int i = 0; i < 10; ++i) {
      ManifoldPoint x = random_point(Manifold::grassmann(8, 2), rng);
      Eigen::MatrixXd hn = random_bounded_symmetric(8, rng);
      std::vector<double> lg, d_oja, d_rsgd;
      for (double gamma : {1e-1, 1e-2, 1e-3, 1e-4}) {
        ManifoldPoint p = power_update(x, hn, gamma);
        Eigen::MatrixXd oja = orthonormalize(oja_update(x, hn, gamma));
        ManifoldPoint r = rsgd_update(x, hn, gamma);
        lg.push_back(std::log10(gamma));
        d_oja.push_back(std::log10((p.coords - oja).norm()));
        d_rsgd.push_back(std::log10((p.coords - r.coords).norm()));
      }
      if (lsq_slope(lg, d_oja) < 1.9 || lsq_slope(lg, d_rsgd) < 1.9) return false;
    }
    return true;
  }});

  checks.push_back({"frame_rotation_invariance", [] {
    RngStream rng(18, 0);
    ManifoldPoint x = random_point(Manifold::grassmann(6, 2), rng);
    Eigen::MatrixXd hn = random_bounded_symmetric(6, rng);
    Eigen::MatrixXd q = haar_orthogonal(2, rng);
    ManifoldPoint xq(x.space, x.coords * q);
    double gamma = 0.05;
    double d1 = projector_frobenius_distance(power_update(x, hn, gamma),
                                             power_update(xq, hn, gamma));
    double d2 = projector_frobenius_distance(rsgd_update(x, hn, gamma),
                                             rsgd_update(xq, hn, gamma));
    double rayleigh_gap = std::abs(rayleigh_value(x, hn) - rayleigh_value(xq, hn));
    return d1 < 1e-10 && d2 < 1e-10 && rayleigh_gap < 1e-12;
  }});

  checks.push_back({"gradient_consistency", [] {
    RngStream rng(19, 0);
    const double h = 1e-5;
    for (int i = 0; i < 20; ++i) {
      ManifoldPoint x = random_point(Manifold::grassmann(7, 3), rng);
      Eigen::MatrixXd hn = random_bounded_symmetric(7, rng);
      TangentVector v = random_tangent(x, rng, 1.0);
      auto f = [&](double t) {
        return rayleigh_value(retract(x, TangentVector(x, t * v.vec)), hn);
      };
      double fd = (f(h) - f(-h)) / (2.0 * h);
      double ip = (riemannian_grad(x, hn).vec.array() * v.vec.array()).sum();
      if (std::abs(fd - ip) > 1e-5 * std::max(1.0, std::abs(ip))) return false;
    }
    return true;
  }});

  checks.push_back({"hessian_spectrum", [] {
    const int d = 4, k = 2;
    Eigen::VectorXd lambda(d);
    lambda << 1.5, 1.0, 0.5, 1.0 / 3.0;
    Eigen::MatrixXd h = lambda.asDiagonal();
    PcaProblem problem = PcaProblem::from_covariance(h, k);
    const int m = (d - k) * k;
    Eigen::MatrixXd op(m, m);
    for (int j = 0; j < k; ++j)
      for (int i = k; i < d; ++i) {
        Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(d, k);
        basis(i, j) = 1.0;
        TangentVector out =
            hessian_apply(problem.x_star, h, TangentVector(problem.x_star, basis));
        int col = j * (d - k) + (i - k);
        for (int jj = 0; jj < k; ++jj)
          for (int ii = k; ii < d; ++ii)
            op(jj * (d - k) + (ii - k), col) = out.vec(ii, jj);
      }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op);
    double min_eig = es.eigenvalues().minCoeff();
    return (op - op.transpose()).norm() < 1e-12 &&
           std::abs(min_eig - problem.eigengap()) < 1e-12 && min_eig > 0;
  }});

  checks.push_back({"euclidean_average_is_arithmetic_mean", [] {
    Manifold space = Manifold::euclidean(3);
    ManifoldPoint x_star(space, Eigen::Vector3d::Zero());
    EuclideanQuadraticOracle oracle(x_star, Eigen::Matrix3d::Identity());
    RunConfig config;
    config.schedule = StepSchedule::polynomial(0.5, 0.5);
    config.n_iters = 300;
    config.seed = 7;
    config.record_every = 300;
    ManifoldPoint x0(space, Eigen::Vector3d(1.0, -2.0, 0.5));

    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    Eigen::Vector3d x = x0.coords;
    RngStream rng(7, 0);
    // flat-array replay of the same recursion
    for (int n = 1; n <= 300; ++n) {
      double gamma = 0.5 / std::sqrt(static_cast<double>(n));
      Eigen::Vector3d g = x + rng.normal_vector(3);
      x -= gamma * g;
      mean += (x - mean) / n;
    }
    Trajectory traj = run_sgd(oracle, x0, config);
    return std::abs(traj.err_avg.back() - mean.squaredNorm()) < 1e-12;
  }});

  checks.push_back({"stream_determinism", [] {
    Eigen::MatrixXd h = Eigen::Vector3d(1.0, 0.5, 0.25).asDiagonal();
    MatrixStream a = MatrixStream::rank_one_gaussian(h, 42).with_stream(3);
    MatrixStream b = MatrixStream::rank_one_gaussian(h, 42).with_stream(3);
    for (int i = 0; i < 50; ++i) {
      Eigen::MatrixXd ma = sample_stream(a);
      Eigen::MatrixXd mb = sample_stream(b);
      if ((ma - mb).cwiseAbs().maxCoeff() != 0.0) return false;
    }
    return true;
  }});

  checks.push_back({"slope_fit_planted", [] {
    Trajectory traj;
    for (std::int64_t n : record_grid(100'000, 10)) {
      if (n == 0) continue;
      traj.iters.push_back(n);
      traj.gamma.push_back(0.0);
      traj.err_sgd.push_back(5.0 / std::sqrt(static_cast<double>(n)));
      traj.err_avg.push_back(1.0 / static_cast<double>(n));
    }
    SlopeFit avg = fit_loglog_slope(traj, TrajField::ErrAvg, 1);
    SlopeFit sgd = fit_loglog_slope(traj, TrajField::ErrSgd, 1);
    return std::abs(avg.slope + 1.0) < 1e-9 && std::abs(sgd.slope + 0.5) < 1e-9 &&
           std::abs(sgd.intercept - std::log10(5.0)) < 1e-9 && avg.r2 > 1.0 - 1e-12;
  }});

  checks.push_back({"covariance_trace_closed_form", [] {
    Eigen::MatrixXd h = Eigen::Vector2d(0.75, 0.25).asDiagonal();
    PcaProblem problem = PcaProblem::from_covariance(h, 1);
    CovariancePrediction pred = pca_asymptotic_covariance(problem, 1.0);
    Eigen::VectorXd hess(1), sigma(1);
    hess << problem.eigengap();
    sigma << problem.eigvals(0) * problem.eigvals(1);
    return std::abs(pred.trace - 0.75) < 1e-12 &&
           std::abs(sandwich_trace(hess, sigma) - pred.trace) < 1e-12;
  }});

  checks.push_back({"sphere_transport_isometry", [] {
    RngStream rng(20, 0);
    for (int i = 0; i < 20; ++i) {
      ManifoldPoint x = random_point(Manifold::sphere(4), rng);
      ManifoldPoint y = exp_map(x, random_tangent(x, rng, 2.0 * rng.uniform()));
      TangentVector v = random_tangent(x, rng, 1.0 + rng.uniform());
      TangentVector w = parallel_transport_sphere(x, y, v);
      if (std::abs(w.norm() - v.norm()) > 1e-10) return false;
      TangentVector t = parallel_transport_sphere(x, y, log_map(x, y));
      if ((t.vec + log_map(y, x).vec).norm() > 1e-9) return false;
      ManifoldPoint z = exp_map(x, log_map(x, y));
      if ((z.coords - y.coords).norm() > 1e-9) return false;
    }
    return true;
  }});

  checks.push_back({"karcher_two_point_midpoint", [] {
    Manifold space = Manifold::sphere(3);
    ManifoldPoint m(space, Eigen::Vector3d(0.0, 0.0, 1.0));
    RngStream rng(21, 0);
    TangentVector dir = random_tangent(m, rng, 0.4);
    ManifoldPoint a = exp_map(m, dir);
    ManifoldPoint b = exp_map(m, TangentVector(m, -dir.vec));
    ManifoldPoint k = karcher_mean_bruteforce({a, b}, 1e-12);
    return geodesic_distance(k, m) < 1e-9;
  }});

  int failures = 0;
  for (const auto& check : checks) {
    bool ok = false;
    std::string detail;
    try {
      ok = check.fn();
    } catch (const std::exception& e) {
      detail = std::string(" (") + e.what() + ")";
    }
    out << (ok ? "ok   " : "FAIL ") << check.name << detail << '\n';
    if (!ok) ++failures;
  }
  out << (failures == 0 ? "selftest passed" : "selftest FAILED") << " ("
      << checks.size() - failures << "/" << checks.size() << ")\n";
  return failures;
}

}  // namespace ravg
