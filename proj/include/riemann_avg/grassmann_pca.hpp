#pragma once

#include <cstdint>
#include <vector>

#include "riemann_avg/manifold.hpp"
#include "riemann_avg/schedule.hpp"
#include "riemann_avg/trajectory.hpp"

namespace ravg {

struct MatrixStream;

/// Streaming k-PCA instance: a target covariance H with a strict eigengap
/// at k, its spectrum, and the frame spanning the top-k eigenspace.
struct PcaProblem {
  Eigen::MatrixXd H;
  int k;
  Eigen::VectorXd eigvals;  // descending
  ManifoldPoint x_star;     // Grassmann(d, k)

  static PcaProblem from_covariance(const Eigen::MatrixXd& H, int k);

  int dim() const { return static_cast<int>(H.rows()); }
  double eigengap() const { return eigvals(k - 1) - eigvals(k); }
};

/// Rayleigh objective -0.5 tr(X^T H X); invariant to frame rotation.
double rayleigh_value(const ManifoldPoint& X, const Eigen::MatrixXd& H);

/// Riemannian gradient -(I - XX^T) H X; vanishes exactly on invariant
/// subspaces of H.
TangentVector riemannian_grad(const ManifoldPoint& X, const Eigen::MatrixXd& Hn);

/// Hessian action Delta X^T H X - (I - XX^T) H Delta; on the eigenbasis it
/// scales v_i e_j^T by (lambda_j - lambda_i).
TangentVector hessian_apply(const ManifoldPoint& x_star, const Eigen::MatrixXd& H,
                            const TangentVector& delta);

/// Randomized power step R_X(gamma H_n X); the retraction argument is the
/// raw matrix, not its tangent projection.
ManifoldPoint power_update(const ManifoldPoint& X, const Eigen::MatrixXd& Hn,
                           double gamma);

/// First-order expansion of the power step; returned raw (leaves the
/// manifold at O(gamma^2)).
Eigen::MatrixXd oja_update(const ManifoldPoint& X, const Eigen::MatrixXd& Hn,
                           double gamma);

/// Symmetrized variant X + gamma (2H - XX^T H - H XX^T) X, returned raw.
Eigen::MatrixXd yang_update(const ManifoldPoint& X, const Eigen::MatrixXd& Hn,
                            double gamma);

/// Riemannian SGD step R_X(gamma (I - XX^T) H_n X).
ManifoldPoint rsgd_update(const ManifoldPoint& X, const Eigen::MatrixXd& Hn,
                          double gamma);

/// Averaging by one randomized-power step on the running projector mean:
/// R_xt(X_n X_n^T xt / n).
ManifoldPoint pca_average_power(const ManifoldPoint& x_tilde, const ManifoldPoint& x_n,
                                std::int64_t n);

/// Averaging by the inverse retraction (the generic streaming average
/// specialized to the Grassmannian).
ManifoldPoint pca_average_retraction(const ManifoldPoint& x_tilde,
                                     const ManifoldPoint& x_n, std::int64_t n);

enum class PcaUpdateRule { Power, Rsgd };
enum class PcaAverageRule { PowerAvg, RetractionAvg };

struct PcaRunResult {
  Trajectory traj;       // err fields hold d_F^2 against the top-k eigenspace
  ManifoldPoint x_final;
  ManifoldPoint x_avg_final;
};

/// Run the streaming PCA recursion with its average from a perturbed start
/// (tangent step of norm 0.1 off x_star). Deterministic per
/// (stream seed, replicate_index).
PcaRunResult run_streaming_pca(const MatrixStream& stream, const PcaProblem& problem,
                               const StepSchedule& schedule, std::int64_t n_iters,
                               std::uint64_t replicate_index,
                               PcaUpdateRule update_rule = PcaUpdateRule::Power,
                               PcaAverageRule average_rule = PcaAverageRule::PowerAvg,
                               int record_every = 20);

struct EigengapReport {
  double gap;                 // lambda_k - lambda_{k+1} of the frame average
  Eigen::VectorXd spectrum;   // descending
};

/// Spectrum of (1/n) sum_i X_i X_i^T; its trace is always k.
EigengapReport eigengap_of_average(const std::vector<ManifoldPoint>& frames);

double squared_frobenius_error(const ManifoldPoint& X, const ManifoldPoint& x_star);

}  // namespace ravg
