#include "riemann_avg/streams.hpp"

#include <cmath>

namespace ravg {

Eigen::VectorXd spectrum_eigenvalues(const SpectrumSpec& spec) {
  if (spec.d < 2 || spec.k < 1 || spec.k >= spec.d)
    throw DimensionError("spectrum requires d >= k + 1");
  if (spec.alpha < 0 || spec.beta < 0)
    throw DomainError("spectrum exponents must be non-negative");
  Eigen::VectorXd lambda(spec.d);
  for (int i = 1; i <= spec.d; ++i) {
    lambda(i - 1) = i <= spec.k
                        ? std::pow(static_cast<double>(i), -spec.alpha) + spec.beta
                        : std::pow(static_cast<double>(i - 1), -spec.alpha);
  }
  for (int i = 1; i < spec.d; ++i)
    if (lambda(i) > lambda(i - 1) + 1e-15)
      throw DomainError("spectrum rule produced a non-monotone spectrum");
  if (lambda(spec.k - 1) - lambda(spec.k) <= 1e-12)
    throw DomainError("degenerate spectrum: no eigengap at k");
  return lambda;
}

CovarianceModel make_covariance(const SpectrumSpec& spec) {
  Eigen::VectorXd lambda = spectrum_eigenvalues(spec);
  Eigen::MatrixXd v;
  if (spec.eigvecs == SpectrumSpec::Eigvecs::Identity) {
    v = Eigen::MatrixXd::Identity(spec.d, spec.d);
  } else {
    RngStream rng(spec.eigvec_seed, 0);
    v = haar_orthogonal(spec.d, rng);
  }
  Eigen::MatrixXd h = v * lambda.asDiagonal() * v.transpose();
  ManifoldPoint x_star(Manifold::grassmann(spec.d, spec.k), v.leftCols(spec.k));
  return {h, PcaProblem{h, spec.k, std::move(lambda), std::move(x_star)}};
}

MatrixStream MatrixStream::rank_one_gaussian(const Eigen::MatrixXd& H, std::uint64_t seed,
                                             std::uint64_t stream_index) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  if (es.eigenvalues().minCoeff() < -1e-12)
    throw DomainError("rank-one stream requires a positive semi-definite expectation");
  Eigen::MatrixXd sqrt_h = es.eigenvectors() *
                           es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                           es.eigenvectors().transpose();
  return {Kind::RankOneGaussian, std::move(sqrt_h), seed, RngStream(seed, stream_index)};
}

MatrixStream MatrixStream::counterexample_planar(std::uint64_t seed,
                                                 std::uint64_t stream_index) {
  return {Kind::CounterexamplePlanar, Eigen::MatrixXd::Zero(2, 2), seed,
          RngStream(seed, stream_index)};
}

MatrixStream MatrixStream::fixed(const Eigen::MatrixXd& H, std::uint64_t seed) {
  return {Kind::FixedMatrix, H, seed, RngStream(seed, 0)};
}

MatrixStream MatrixStream::with_stream(std::uint64_t stream_index) const {
  return {kind, payload, seed, RngStream(seed, stream_index)};
}

Eigen::MatrixXd sample_stream(MatrixStream& stream) {
  switch (stream.kind) {
    case MatrixStream::Kind::FixedMatrix:
      return stream.payload;
    case MatrixStream::Kind::RankOneGaussian: {
      Eigen::VectorXd h = stream.payload * stream.rng.normal_vector(stream.dim());
      return h * h.transpose();
    }
    case MatrixStream::Kind::CounterexamplePlanar: {
      // theta is an even mixture of N(-pi/2, pi^2/4) and N(pi/4, pi^2/16)
      bool first = stream.rng.bernoulli(0.5);
      double theta = first ? -M_PI / 2 + (M_PI / 2) * stream.rng.normal()
                           : M_PI / 4 + (M_PI / 4) * stream.rng.normal();
      Eigen::Vector2d h(std::cos(theta) / std::sqrt((1.0 - 1.0 / M_PI) / 2.0),
                        std::sin(theta) / std::sqrt((1.0 + 1.0 / M_PI) / 2.0));
      return h * h.transpose();
    }
  }
  throw DomainError("unreachable");
}

Eigen::Matrix2d counterexample_covariance() {
  // E[cos 2theta] and E[sin 2theta] from the normal characteristic function
  // E[e^{2i theta}] = e^{2im - 2s^2} averaged over the two mixture branches.
  const double c_bar = 0.5 * (std::cos(-M_PI) * std::exp(-M_PI * M_PI / 2.0) +
                              std::cos(M_PI / 2) * std::exp(-M_PI * M_PI / 8.0));
  const double s_bar = 0.5 * (std::sin(-M_PI) * std::exp(-M_PI * M_PI / 2.0) +
                              std::sin(M_PI / 2) * std::exp(-M_PI * M_PI / 8.0));
  const double a2 = (1.0 - 1.0 / M_PI) / 2.0;
  const double b2 = (1.0 + 1.0 / M_PI) / 2.0;
  Eigen::Matrix2d h;
  h(0, 0) = (1.0 + c_bar) / (2.0 * a2);
  h(1, 1) = (1.0 - c_bar) / (2.0 * b2);
  h(0, 1) = h(1, 0) = 0.5 * s_bar / std::sqrt(a2 * b2);
  return h;
}

Eigen::Vector2d counterexample_claimed_eigenvalues() {
  return {(1.0 + 1.0 / M_PI) / 4.0, (1.0 - 1.0 / M_PI) / 4.0};
}

}  // namespace ravg
