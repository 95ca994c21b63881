#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "riemann_avg/manifold.hpp"
#include "riemann_avg/rng.hpp"
#include "riemann_avg/schedule.hpp"
#include "riemann_avg/trajectory.hpp"

namespace ravg {

/// Which first-order map drives the updates: the projection-like retraction
/// or the exponential map (sphere / Euclidean space only).
enum class MapKind { Retraction, Exponential };

/// Noisy first-order oracle: unbiased gradient draws plus the error metric
/// used for trajectory recording.
class GradientOracle {
 public:
  virtual ~GradientOracle() = default;

  virtual TangentVector sample(const ManifoldPoint& x, RngStream& rng) const = 0;

  /// Exact mean gradient, when available (used by tests).
  virtual std::optional<TangentVector> exact_gradient(const ManifoldPoint&) const {
    return std::nullopt;
  }

  virtual std::optional<ManifoldPoint> optimum() const { return std::nullopt; }

  /// Squared error of x against the optimum, in the problem's own metric.
  virtual double squared_error(const ManifoldPoint& x) const = 0;

  virtual std::string metric_id() const = 0;
};

/// One SGD step: R_x(-gamma g) (or Exp_x with MapKind::Exponential).
ManifoldPoint sgd_step(const ManifoldPoint& x, const TangentVector& g, double gamma,
                       MapKind map = MapKind::Retraction);

/// One streaming-average step: R_xt(inverse_retract(xt, x_n) / n).
/// In Euclidean space this is exactly the running arithmetic mean.
ManifoldPoint streaming_average_step(const ManifoldPoint& x_tilde_prev,
                                     const ManifoldPoint& x_n, std::int64_t n,
                                     MapKind map = MapKind::Retraction);

struct RunConfig {
  StepSchedule schedule;
  std::int64_t n_iters = 1000;
  std::uint64_t seed = 0;
  std::uint64_t stream_index = 0;
  int record_every = 20;  // points per decade on the recording grid
  MapKind map = MapKind::Retraction;
};

/// Observer invoked after every iteration with (n, x_n, x_tilde_n).
using IterationObserver =
    std::function<void(std::int64_t, const ManifoldPoint&, const ManifoldPoint&)>;

/// Jointly advance the SGD iterate and its streaming average from x0,
/// recording errors on the configured grid. Deterministic for a fixed
/// (seed, stream_index, config). A failed averaging step aborts the run
/// with AveragingDomainError carrying the iteration index.
Trajectory run_sgd(const GradientOracle& problem, const ManifoldPoint& x0,
                   const RunConfig& config, const IterationObserver& observer = {});

/// f(x) = 0.5 ||x - x*||^2 with additive Gaussian noise of the given
/// covariance; the workhorse sanity problem with known asymptotics.
class EuclideanQuadraticOracle : public GradientOracle {
 public:
  EuclideanQuadraticOracle(ManifoldPoint x_star, Eigen::MatrixXd noise_cov);

  TangentVector sample(const ManifoldPoint& x, RngStream& rng) const override;
  std::optional<TangentVector> exact_gradient(const ManifoldPoint& x) const override;
  std::optional<ManifoldPoint> optimum() const override { return x_star_; }
  double squared_error(const ManifoldPoint& x) const override {
    return (x.coords - x_star_.coords).squaredNorm();
  }
  std::string metric_id() const override { return "sq_euclidean_dist"; }

 private:
  ManifoldPoint x_star_;
  Eigen::MatrixXd noise_sqrt_;
};

}  // namespace ravg
