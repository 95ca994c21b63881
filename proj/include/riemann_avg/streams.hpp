#pragma once

#include <cstdint>

#include "riemann_avg/grassmann_pca.hpp"
#include "riemann_avg/rng.hpp"

namespace ravg {

/// Synthetic covariance spectrum: lambda_i = 1/i^alpha + beta for i <= k and
/// 1/(i-1)^alpha for k < i <= d. beta is exactly the eigengap at k.
struct SpectrumSpec {
  enum class Eigvecs { Identity, RandomOrthogonal };

  int d = 50;
  int k = 10;
  double alpha = 1.0;
  double beta = 0.2;
  Eigvecs eigvecs = Eigvecs::Identity;
  std::uint64_t eigvec_seed = 0;
};

Eigen::VectorXd spectrum_eigenvalues(const SpectrumSpec& spec);

struct CovarianceModel {
  Eigen::MatrixXd H;
  PcaProblem problem;
};

/// H = V Lambda V^T with the spectrum rule above; rejects non-monotone or
/// gapless spectra.
CovarianceModel make_covariance(const SpectrumSpec& spec);

/// Seeded generator of i.i.d. symmetric matrices with known expectation.
/// Holds live RNG state, so a stream must not be shared across threads;
/// use with_stream() to derive independent replicas.
struct MatrixStream {
  enum class Kind { RankOneGaussian, CounterexamplePlanar, FixedMatrix };

  static MatrixStream rank_one_gaussian(const Eigen::MatrixXd& H, std::uint64_t seed,
                                        std::uint64_t stream_index = 0);
  static MatrixStream counterexample_planar(std::uint64_t seed,
                                            std::uint64_t stream_index = 0);
  static MatrixStream fixed(const Eigen::MatrixXd& H, std::uint64_t seed = 0);

  MatrixStream with_stream(std::uint64_t stream_index) const;

  int dim() const { return static_cast<int>(payload.rows()); }

  Kind kind;
  Eigen::MatrixXd payload;  // H^{1/2} for RankOneGaussian, H for FixedMatrix
  std::uint64_t seed = 0;
  RngStream rng{0, 0};
};

/// Next matrix draw H_n (rank-one h h^T for the random kinds).
Eigen::MatrixXd sample_stream(MatrixStream& stream);

/// Exact expectation E[h h^T] of the planar counterexample stream, from the
/// Gaussian-mixture moments of the angle variable.
Eigen::Matrix2d counterexample_covariance();

/// The two eigenvalues (1 +- 1/pi)/4 quoted for the planar stream; reported
/// next to the Monte Carlo spectrum, never asserted.
Eigen::Vector2d counterexample_claimed_eigenvalues();

}  // namespace ravg
