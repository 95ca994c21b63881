#pragma once

#include <cstdint>
#include <vector>

#include "riemann_avg/sgd.hpp"

namespace ravg {

/// Streaming Frechet-mean estimation on the sphere: samples are exponential
/// steps from a population center with tangent Gaussian directions truncated
/// to norm pi/4, so the mean of the sampling distribution is the center and
/// the objective is strongly convex along geodesics on the sampling region.
struct SphereMeanProblem {
  SphereMeanProblem(ManifoldPoint center, double dispersion);

  int dim() const { return mu.space.ambient_dim(); }

  ManifoldPoint mu;   // population center = Frechet mean
  double dispersion;  // angular standard deviation, in (0, 0.5]
};

/// One sample z = Exp_mu(xi), ||xi|| <= pi/4.
ManifoldPoint sample_sphere_point(const SphereMeanProblem& problem, RngStream& rng);

/// Stochastic gradient of 0.5 d^2(x, .): -Log_x(z).
TangentVector frechet_gradient_sample(const ManifoldPoint& x, const ManifoldPoint& z);

/// Fixed-point iteration x <- Exp_x(mean_i Log_x(x_i)) down to step norm
/// < tol; the result's Karcher gradient norm is below tol.
ManifoldPoint karcher_mean_bruteforce(const std::vector<ManifoldPoint>& points,
                                      double tol);

/// At iteration n: squared log-distance of the Karcher mean of x_1..x_n from
/// the optimum, against twice the squared norm of the tangent average of the
/// Log_{x*}(x_i).
struct KarcherCheck {
  std::int64_t n;
  double karcher_sq;
  double tangent_bound;
};

struct SphereMeanRunResult {
  Trajectory traj;  // err fields hold squared geodesic distance to the center
  std::vector<KarcherCheck> karcher;
};

class FrechetMeanOracle : public GradientOracle {
 public:
  explicit FrechetMeanOracle(SphereMeanProblem problem) : problem_(std::move(problem)) {}

  TangentVector sample(const ManifoldPoint& x, RngStream& rng) const override;
  std::optional<ManifoldPoint> optimum() const override { return problem_.mu; }
  double squared_error(const ManifoldPoint& x) const override;
  std::string metric_id() const override { return "sq_geodesic_dist"; }

 private:
  SphereMeanProblem problem_;
};

/// SGD with the exponential map on the sphere-mean problem; requires a
/// polynomially decaying schedule with alpha in [1/2, 1). Karcher checks are
/// evaluated at every n <= karcher_upto.
SphereMeanRunResult run_sphere_mean(const SphereMeanProblem& problem,
                                    const StepSchedule& schedule, std::int64_t n_iters,
                                    std::uint64_t seed, std::uint64_t stream_index = 0,
                                    int record_every = 20, int karcher_upto = 50);

}  // namespace ravg
