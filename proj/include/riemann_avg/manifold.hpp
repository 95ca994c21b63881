#pragma once

#include <Eigen/Dense>

#include "riemann_avg/errors.hpp"
#include "riemann_avg/rng.hpp"

namespace ravg {

enum class ManifoldKind { Euclidean, Sphere, Grassmann };

/// Descriptor of one of the three supported spaces. Euclidean(d) and
/// Sphere(d) store points as d x 1 columns, Grassmann(d, k) as d x k
/// orthonormal frames representing a k-dimensional subspace.
class Manifold {
 public:
  static Manifold euclidean(int d) { return {ManifoldKind::Euclidean, d, 1}; }
  static Manifold sphere(int d) { return {ManifoldKind::Sphere, d, 1}; }
  static Manifold grassmann(int d, int k) {
    if (k < 1 || k >= d)
      throw DimensionError("Grassmann requires 1 <= k < d");
    return {ManifoldKind::Grassmann, d, k};
  }

  ManifoldKind kind() const { return kind_; }
  int ambient_dim() const { return d_; }
  int subspace_dim() const { return k_; }

  int rows() const { return d_; }
  int cols() const { return kind_ == ManifoldKind::Grassmann ? k_ : 1; }

  friend bool operator==(const Manifold& a, const Manifold& b) {
    return a.kind_ == b.kind_ && a.d_ == b.d_ && a.k_ == b.k_;
  }
  friend bool operator!=(const Manifold& a, const Manifold& b) {
    return !(a == b);
  }

 private:
  Manifold(ManifoldKind kind, int d, int k) : kind_(kind), d_(d), k_(k) {
    if (d < 1) throw DimensionError("ambient dimension must be positive");
  }
  ManifoldKind kind_;
  int d_;
  int k_;
};

/// Feasibility tolerance for point and tangent invariants.
inline constexpr double kManifoldTol = 1e-10;

/// A point on a manifold. The constructor enforces the defining constraint
/// (unit norm on the sphere, orthonormal columns on the Grassmannian).
struct ManifoldPoint {
  ManifoldPoint(Manifold space, Eigen::MatrixXd coords);

  Manifold space;
  Eigen::MatrixXd coords;
};

/// A vector attached to a base point; the constructor enforces tangency
/// (x . v = 0 on the sphere, X^T V = 0 on the Grassmannian).
struct TangentVector {
  TangentVector(ManifoldPoint base, Eigen::MatrixXd vec);

  double norm() const { return vec.norm(); }

  ManifoldPoint base;
  Eigen::MatrixXd vec;
};

/// Principal angles between two subspaces, ascending in [0, pi/2].
struct PrincipalAngles {
  Eigen::VectorXd theta;
};

struct SubspaceDistances {
  double arc;         ///< ||theta||_2 (geodesic distance)
  double frobenius;   ///< ||sin theta||_2 (projection distance)
  double retraction;  ///< ||R_X^{-1}(Y)||_F, +inf when X^T Y is singular
};

/// Orthogonal projection of an ambient perturbation onto the tangent space.
TangentVector project_tangent(const ManifoldPoint& x, const Eigen::MatrixXd& w);

/// Projection-like retraction: normalization on the sphere,
/// (X+V)[(X+V)^T (X+V)]^{-1/2} on the Grassmannian, addition in Euclidean
/// space. The raw overload accepts arbitrary ambient perturbations (the
/// Grassmann map is defined on all of R^{d x k}, not only the tangent space).
ManifoldPoint retract(const ManifoldPoint& x, const TangentVector& v);
ManifoldPoint retract_raw(const ManifoldPoint& x, const Eigen::MatrixXd& w);

/// Inverse of the retraction. Sphere: y/(x.y) - x, defined for x.y > 0.
/// Grassmann: (I - XX^T) Y (X^T Y)^{-1}, defined while X^T Y is invertible.
TangentVector inverse_retract(const ManifoldPoint& x, const ManifoldPoint& y);

/// Exponential map (sphere and Euclidean space only).
ManifoldPoint exp_map(const ManifoldPoint& x, const TangentVector& v);

/// Inverse exponential map; ||log_map(x, y)|| is the geodesic distance.
TangentVector log_map(const ManifoldPoint& x, const ManifoldPoint& y);

/// Parallel translation along the connecting geodesic of the sphere.
TangentVector parallel_transport_sphere(const ManifoldPoint& x,
                                        const ManifoldPoint& y,
                                        const TangentVector& v);

PrincipalAngles principal_angles(const ManifoldPoint& X, const ManifoldPoint& Y);

SubspaceDistances subspace_distances(const ManifoldPoint& X, const ManifoldPoint& Y);

/// d_F through the projector embedding ||XX^T - YY^T||_F / sqrt(2); agrees
/// with subspace_distances().frobenius but stays accurate down to roundoff
/// for nearly identical subspaces.
double projector_frobenius_distance(const ManifoldPoint& X, const ManifoldPoint& Y);

/// Geodesic distance in the manifold's own metric (arc length for
/// sphere/Grassmann, Euclidean norm otherwise).
double geodesic_distance(const ManifoldPoint& x, const ManifoldPoint& y);

ManifoldPoint random_point(const Manifold& space, RngStream& rng);

/// Gaussian tangent direction rescaled to the requested norm.
TangentVector random_tangent(const ManifoldPoint& x, RngStream& rng, double norm);

/// M^{-1/2} for a symmetric positive-definite matrix via eigendecomposition;
/// eigenvalues below 1e-12 raise SingularityError.
Eigen::MatrixXd symmetric_inverse_sqrt(const Eigen::MatrixXd& m);

/// M (M^T M)^{-1/2}: nearest orthonormal frame to a full-rank d x k matrix.
Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& m);

}  // namespace ravg
