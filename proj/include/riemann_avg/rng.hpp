#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace ravg {

/// SplitMix64: a counter-based 64-bit generator (the state is a plain counter
/// advanced by a fixed odd constant, the output a bijective mix of it).
/// Satisfies UniformRandomBitGenerator, so it plugs into <random>
/// distributions.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type(0); }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// One independent random stream, keyed by (seed, stream_index) so that
/// parallel replicates never share state.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_index = 0)
      : engine_(derive_key(seed, stream_index)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal draw.
  double normal() { return gauss_(engine_); }

  bool bernoulli(double p) { return uniform() < p; }

  Eigen::VectorXd normal_vector(int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = normal();
    return v;
  }

  Eigen::MatrixXd normal_matrix(int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    // column-major fill order is part of the determinism contract
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) m(i, j) = normal();
    return m;
  }

 private:
  static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 mixer(seed ^ (0xD1B54A32D192ED03ULL * (stream + 1)));
    mixer();
    return mixer();
  }

  SplitMix64 engine_;
  std::normal_distribution<double> gauss_{0.0, 1.0};
};

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the sign
/// of diag(R) fixed).
inline Eigen::MatrixXd haar_orthogonal(int n, RngStream& rng) {
  Eigen::MatrixXd g = rng.normal_matrix(n, n);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

}  // namespace ravg
