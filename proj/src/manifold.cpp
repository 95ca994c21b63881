#include "riemann_avg/manifold.hpp"

#include <cmath>
#include <limits>

namespace ravg {

namespace {

constexpr double kEigFloor = 1e-12;
constexpr double kSingularTol = 1e-12;
constexpr double kSphereInverseDomain = 1e-8;
constexpr double kAntipodalTol = 1e-8;

void check_shape(const Manifold& space, const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != space.rows() || m.cols() != space.cols())
    throw DimensionError(std::string(what) + ": expected " +
                         std::to_string(space.rows()) + "x" +
                         std::to_string(space.cols()) + ", got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

double point_violation(const Manifold& space, const Eigen::MatrixXd& coords) {
  switch (space.kind()) {
    case ManifoldKind::Euclidean:
      return 0.0;
    case ManifoldKind::Sphere:
      return std::abs(coords.norm() - 1.0);
    case ManifoldKind::Grassmann: {
      const int k = space.subspace_dim();
      Eigen::MatrixXd gram = coords.transpose() * coords;
      return (gram - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff();
    }
  }
  return 0.0;
}

double tangency_violation(const ManifoldPoint& base, const Eigen::MatrixXd& vec) {
  switch (base.space.kind()) {
    case ManifoldKind::Euclidean:
      return 0.0;
    case ManifoldKind::Sphere:
      return std::abs((base.coords.transpose() * vec)(0, 0));
    case ManifoldKind::Grassmann:
      return (base.coords.transpose() * vec).cwiseAbs().maxCoeff();
  }
  return 0.0;
}

Eigen::VectorXd clipped_singular_values(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues().cwiseMin(1.0).cwiseMax(0.0);
}

}  // namespace

ManifoldPoint::ManifoldPoint(Manifold space_in, Eigen::MatrixXd coords_in)
    : space(space_in), coords(std::move(coords_in)) {
  check_shape(space, coords, "point coords");
  if (point_violation(space, coords) > kManifoldTol)
    throw DomainError("coordinates violate the manifold constraint");
}

TangentVector::TangentVector(ManifoldPoint base_in, Eigen::MatrixXd vec_in)
    : base(std::move(base_in)), vec(std::move(vec_in)) {
  check_shape(base.space, vec, "tangent vec");
  if (tangency_violation(base, vec) > kManifoldTol)
    throw DomainError("vector is not tangent at the base point");
}

Eigen::MatrixXd symmetric_inverse_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success)
    throw SingularityError("eigendecomposition failed");
  const Eigen::VectorXd& evals = es.eigenvalues();
  if (evals.minCoeff() < kEigFloor)
    throw SingularityError("matrix is numerically singular (eigenvalue below 1e-12)");
  Eigen::VectorXd inv_sqrt = evals.array().rsqrt();
  return es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& m) {
  return m * symmetric_inverse_sqrt(m.transpose() * m);
}

TangentVector project_tangent(const ManifoldPoint& x, const Eigen::MatrixXd& w) {
  check_shape(x.space, w, "projection input");
  switch (x.space.kind()) {
    case ManifoldKind::Euclidean:
      return {x, w};
    case ManifoldKind::Sphere: {
      double dot = (x.coords.transpose() * w)(0, 0);
      return {x, w - dot * x.coords};
    }
    case ManifoldKind::Grassmann:
      return {x, w - x.coords * (x.coords.transpose() * w)};
  }
  throw DomainError("unreachable");
}

ManifoldPoint retract_raw(const ManifoldPoint& x, const Eigen::MatrixXd& w) {
  check_shape(x.space, w, "retraction argument");
  if (w.isZero(0.0)) return x;  // R_x(0) = x exactly
  switch (x.space.kind()) {
    case ManifoldKind::Euclidean:
      return {x.space, x.coords + w};
    case ManifoldKind::Sphere: {
      Eigen::MatrixXd z = x.coords + w;
      double n = z.norm();
      if (n < kSingularTol)
        throw SingularityError("x + v vanishes; normalization undefined");
      return {x.space, z / n};
    }
    case ManifoldKind::Grassmann: {
      Eigen::MatrixXd z = x.coords + w;
      return {x.space, z * symmetric_inverse_sqrt(z.transpose() * z)};
    }
  }
  throw DomainError("unreachable");
}

namespace {

void check_based_at(const ManifoldPoint& x, const TangentVector& v) {
  if (v.base.space != x.space)
    throw DimensionError("tangent vector based on a different manifold");
  if ((v.base.coords - x.coords).cwiseAbs().maxCoeff() > 1e-9)
    throw DomainError("tangent vector is based at a different point");
}

}  // namespace

ManifoldPoint retract(const ManifoldPoint& x, const TangentVector& v) {
  check_based_at(x, v);
  return retract_raw(x, v.vec);
}

TangentVector inverse_retract(const ManifoldPoint& x, const ManifoldPoint& y) {
  if (x.space != y.space) throw DimensionError("points on different manifolds");
  switch (x.space.kind()) {
    case ManifoldKind::Euclidean:
      return {x, y.coords - x.coords};
    case ManifoldKind::Sphere: {
      double dot = (x.coords.transpose() * y.coords)(0, 0);
      if (dot <= kSphereInverseDomain)
        throw DomainError("inverse retraction undefined at or beyond 90 degrees");
      Eigen::MatrixXd v = y.coords / dot - x.coords;
      v -= (x.coords.transpose() * v)(0, 0) * x.coords;  // scrub roundoff
      return {x, v};
    }
    case ManifoldKind::Grassmann: {
      Eigen::MatrixXd xty = x.coords.transpose() * y.coords;
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(xty, Eigen::ComputeFullU | Eigen::ComputeFullV);
      if (svd.singularValues().minCoeff() < kSingularTol)
        throw DomainError("X^T Y is numerically singular (principal angle at 90 degrees)");
      Eigen::MatrixXd residual = y.coords - x.coords * xty;
      Eigen::MatrixXd v =
          residual * svd.solve(Eigen::MatrixXd::Identity(xty.rows(), xty.cols()));
      v -= x.coords * (x.coords.transpose() * v);
      return {x, v};
    }
  }
  throw DomainError("unreachable");
}

ManifoldPoint exp_map(const ManifoldPoint& x, const TangentVector& v) {
  check_based_at(x, v);
  switch (x.space.kind()) {
    case ManifoldKind::Euclidean:
      return {x.space, x.coords + v.vec};
    case ManifoldKind::Sphere: {
      double t = v.vec.norm();
      if (t == 0.0) return x;
      if (t >= M_PI)
        throw DomainError("exponential map restricted to ||v|| < pi");
      Eigen::MatrixXd z = std::cos(t) * x.coords + (std::sin(t) / t) * v.vec;
      return {x.space, z / z.norm()};
    }
    case ManifoldKind::Grassmann:
      throw UnsupportedMapError("exponential map not provided on the Grassmannian");
  }
  throw DomainError("unreachable");
}

TangentVector log_map(const ManifoldPoint& x, const ManifoldPoint& y) {
  if (x.space != y.space) throw DimensionError("points on different manifolds");
  switch (x.space.kind()) {
    case ManifoldKind::Euclidean:
      return {x, y.coords - x.coords};
    case ManifoldKind::Sphere: {
      double c = (x.coords.transpose() * y.coords)(0, 0);
      c = std::min(1.0, std::max(-1.0, c));
      if (c <= -1.0 + kAntipodalTol)
        throw DomainError("log map undefined for antipodal points");
      double theta = std::acos(c);
      Eigen::MatrixXd residual = y.coords - c * x.coords;
      if (theta < 1e-9) return {x, residual};  // sin(theta)/theta -> 1
      return {x, (theta / std::sin(theta)) * residual};
    }
    case ManifoldKind::Grassmann:
      throw UnsupportedMapError("log map not provided on the Grassmannian");
  }
  throw DomainError("unreachable");
}

TangentVector parallel_transport_sphere(const ManifoldPoint& x,
                                        const ManifoldPoint& y,
                                        const TangentVector& v) {
  if (x.space.kind() != ManifoldKind::Sphere)
    throw UnsupportedMapError("parallel transport provided on the sphere only");
  if (v.base.space != x.space || x.space != y.space)
    throw DimensionError("transport operands on different manifolds");

  TangentVector u = log_map(x, y);
  double theta = u.norm();
  if (theta < 1e-14) return {y, v.vec - (y.coords.transpose() * v.vec)(0, 0) * y.coords};

  Eigen::MatrixXd e = u.vec / theta;
  double along = (e.transpose() * v.vec)(0, 0);
  // component along the geodesic rotates in the (x, e) plane; the rest is fixed
  Eigen::MatrixXd w = v.vec - along * e +
                      along * (std::cos(theta) * e - std::sin(theta) * x.coords);
  w -= (y.coords.transpose() * w)(0, 0) * y.coords;
  return {y, w};
}

PrincipalAngles principal_angles(const ManifoldPoint& X, const ManifoldPoint& Y) {
  if (X.space.kind() != ManifoldKind::Grassmann || X.space != Y.space)
    throw DimensionError("principal angles require two points on the same Grassmannian");
  Eigen::VectorXd sigma = clipped_singular_values(X.coords.transpose() * Y.coords);
  Eigen::VectorXd theta(sigma.size());
  // singular values come out descending, so the angles are already ascending
  for (int i = 0; i < sigma.size(); ++i) theta(i) = std::acos(sigma(i));
  return {theta};
}

SubspaceDistances subspace_distances(const ManifoldPoint& X, const ManifoldPoint& Y) {
  if (X.space.kind() != ManifoldKind::Grassmann || X.space != Y.space)
    throw DimensionError("subspace distances require two points on the same Grassmannian");
  Eigen::VectorXd sigma = clipped_singular_values(X.coords.transpose() * Y.coords);
  SubspaceDistances out{};
  double arc2 = 0, fro2 = 0, ret2 = 0;
  bool singular = false;
  for (int i = 0; i < sigma.size(); ++i) {
    double s = sigma(i);
    double theta = std::acos(s);
    arc2 += theta * theta;
    double sin2 = std::max(0.0, 1.0 - s * s);
    fro2 += sin2;
    if (s < kSingularTol)
      singular = true;
    else
      ret2 += sin2 / (s * s);  // tan^2(theta)
  }
  out.arc = std::sqrt(arc2);
  out.frobenius = std::sqrt(fro2);
  out.retraction = singular ? std::numeric_limits<double>::infinity() : std::sqrt(ret2);
  return out;
}

double projector_frobenius_distance(const ManifoldPoint& X, const ManifoldPoint& Y) {
  if (X.space.kind() != ManifoldKind::Grassmann || X.space != Y.space)
    throw DimensionError("projector distance requires two points on the same Grassmannian");
  return (X.coords * X.coords.transpose() - Y.coords * Y.coords.transpose()).norm() /
         std::sqrt(2.0);
}

double geodesic_distance(const ManifoldPoint& x, const ManifoldPoint& y) {
  if (x.space != y.space) throw DimensionError("points on different manifolds");
  switch (x.space.kind()) {
    case ManifoldKind::Euclidean:
      return (y.coords - x.coords).norm();
    case ManifoldKind::Sphere: {
      double c = (x.coords.transpose() * y.coords)(0, 0);
      return std::acos(std::min(1.0, std::max(-1.0, c)));
    }
    case ManifoldKind::Grassmann:
      return subspace_distances(x, y).arc;
  }
  return 0.0;
}

ManifoldPoint random_point(const Manifold& space, RngStream& rng) {
  Eigen::MatrixXd g = rng.normal_matrix(space.rows(), space.cols());
  switch (space.kind()) {
    case ManifoldKind::Euclidean:
      return {space, g};
    case ManifoldKind::Sphere:
      return {space, g / g.norm()};
    case ManifoldKind::Grassmann:
      return {space, orthonormalize(g)};
  }
  throw DomainError("unreachable");
}

TangentVector random_tangent(const ManifoldPoint& x, RngStream& rng, double norm) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    Eigen::MatrixXd g = rng.normal_matrix(x.space.rows(), x.space.cols());
    TangentVector t = project_tangent(x, g);
    double n = t.norm();
    if (n > 1e-8) return {x, (norm / n) * t.vec};
  }
  throw ConvergenceError("failed to draw a nonzero tangent direction");
}

}  // namespace ravg
