#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "riemann_avg/manifold.hpp"
#include "test_helpers.hpp"

using namespace ravg;
using ravg::testing::grassmann_pair;
using ravg::testing::lsq_slope;

namespace {

ManifoldPoint sphere_point(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<int>(values.size()));
  int i = 0;
  for (double x : values) v(i++) = x;
  return {Manifold::sphere(static_cast<int>(values.size())), v / v.norm()};
}

}  // namespace

TEST_CASE("point and tangent invariants are enforced") {
  CHECK_THROWS_AS(ManifoldPoint(Manifold::sphere(3), Eigen::Vector3d(1, 1, 0)),
                  DomainError);
  CHECK_THROWS_AS(ManifoldPoint(Manifold::sphere(3), Eigen::Vector2d(1, 0)),
                  DimensionError);
  Eigen::MatrixXd bad_frame(3, 2);
  bad_frame << 1, 1, 0, 0, 0, 0;
  CHECK_THROWS_AS(ManifoldPoint(Manifold::grassmann(3, 2), bad_frame), DomainError);

  ManifoldPoint x = sphere_point({1, 0, 0});
  CHECK_THROWS_AS(TangentVector(x, Eigen::Vector3d(1, 0, 0)), DomainError);
  CHECK_NOTHROW(TangentVector(x, Eigen::Vector3d(0, 2, -1)));
  CHECK_THROWS_AS(Manifold::grassmann(3, 3), DimensionError);
}

TEST_CASE("project_tangent removes the normal component") {
  ManifoldPoint x = sphere_point({1, 0, 0});
  TangentVector t = project_tangent(x, Eigen::Vector3d(5, 1, 2));
  CHECK(t.vec.isApprox(Eigen::Vector3d(0, 1, 2).eval(), 1e-15));

  ManifoldPoint e1(Manifold::grassmann(2, 1), Eigen::Vector2d(1, 0));
  TangentVector g = project_tangent(e1, Eigen::Vector2d(3, 4));
  CHECK(g.vec.isApprox(Eigen::Vector2d(0, 4).eval(), 1e-15));

  // idempotence on already-tangent input
  RngStream rng(1, 0);
  for (const Manifold& space :
       {Manifold::euclidean(4), Manifold::sphere(4), Manifold::grassmann(5, 2)}) {
    ManifoldPoint p = random_point(space, rng);
    TangentVector v = random_tangent(p, rng, 1.3);
    TangentVector again = project_tangent(p, v.vec);
    CHECK((again.vec - v.vec).norm() < 1e-12);
  }
  CHECK_THROWS_AS(project_tangent(x, Eigen::Vector2d(1, 0)), DimensionError);
}

TEST_CASE("retract matches its closed forms") {
  RngStream rng(2, 0);
  for (const Manifold& space :
       {Manifold::euclidean(3), Manifold::sphere(3), Manifold::grassmann(4, 2)}) {
    ManifoldPoint x = random_point(space, rng);
    TangentVector zero(x, Eigen::MatrixXd::Zero(space.rows(), space.cols()));
    CHECK((retract(x, zero).coords - x.coords).norm() == 0.0);
  }

  // oracle: polar factor of X+V from the SVD
  ManifoldPoint x(Manifold::grassmann(2, 1), Eigen::Vector2d(1, 0));
  Eigen::Vector2d v(0, 1);
  ManifoldPoint y = retract(x, TangentVector(x, v));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(x.coords + v,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::MatrixXd polar = svd.matrixU() * svd.matrixV().transpose();
  CHECK(y.coords.isApprox(polar, 1e-14));
  CHECK(y.coords.isApprox(Eigen::Vector2d(1 / std::sqrt(2.0), 1 / std::sqrt(2.0)).eval(),
                          1e-14));

  ManifoldPoint s = sphere_point({1, 0});
  ManifoldPoint sy = retract(s, TangentVector(s, Eigen::Vector2d(0, 1)));
  CHECK(sy.coords.isApprox(Eigen::Vector2d(1 / std::sqrt(2.0), 1 / std::sqrt(2.0)).eval(),
                           1e-14));

  // rank-deficient X+V
  CHECK_THROWS_AS(retract_raw(x, Eigen::Vector2d(-1, 0)), SingularityError);
}

TEST_CASE("inverse_retract closed forms and round trips") {
  RngStream rng(3, 0);
  for (const Manifold& space :
       {Manifold::euclidean(4), Manifold::sphere(4), Manifold::grassmann(5, 2)}) {
    ManifoldPoint x = random_point(space, rng);
    CHECK(inverse_retract(x, x).norm() < 1e-12);
  }

  ManifoldPoint x(Manifold::grassmann(2, 1), Eigen::Vector2d(1, 0));
  ManifoldPoint y(Manifold::grassmann(2, 1),
                  Eigen::Vector2d(std::cos(M_PI / 4), std::sin(M_PI / 4)));
  TangentVector v = inverse_retract(x, y);
  CHECK(v.vec.isApprox(Eigen::Vector2d(0, 1).eval(), 1e-12));  // (0, tan(pi/4))
  CHECK(v.vec.squaredNorm() == doctest::Approx(1.0).epsilon(1e-12));

  // round trip spans the same subspace
  ManifoldPoint back = retract(x, v);
  CHECK(subspace_distances(back, y).frobenius < 1e-8);

  // sphere domain restriction at 90 degrees
  CHECK_THROWS_AS(inverse_retract(sphere_point({1, 0, 0}), sphere_point({0, 1, 0})),
                  DomainError);
  Eigen::MatrixXd e2 = Eigen::Vector2d(0, 1);
  CHECK_THROWS_AS(
      inverse_retract(x, ManifoldPoint(Manifold::grassmann(2, 1), e2)), DomainError);
}

TEST_CASE("exp_map and log_map on the sphere") {
  ManifoldPoint x = sphere_point({1, 0, 0});
  TangentVector zero(x, Eigen::Vector3d::Zero());
  CHECK((exp_map(x, zero).coords - x.coords).norm() == 0.0);

  TangentVector quarter(x, Eigen::Vector3d(0, M_PI / 2, 0));
  CHECK(exp_map(x, quarter).coords.isApprox(Eigen::Vector3d(0, 1, 0).eval(), 1e-12));

  ManifoldPoint x2 = sphere_point({1, 0});
  ManifoldPoint half = exp_map(x2, TangentVector(x2, Eigen::Vector2d(0, M_PI - 1e-12)));
  CHECK((half.coords - Eigen::Vector2d(-1, 0)).norm() < 1e-9);

  CHECK(log_map(x, x).norm() == 0.0);
  ManifoldPoint y = sphere_point({0, 1, 0});
  CHECK(log_map(x, y).vec.isApprox(Eigen::Vector3d(0, M_PI / 2, 0).eval(), 1e-12));

  RngStream rng(4, 0);
  for (int i = 0; i < 50; ++i) {
    ManifoldPoint a = random_point(Manifold::sphere(4), rng);
    ManifoldPoint b = random_point(Manifold::sphere(4), rng);
    if ((a.coords.transpose() * b.coords)(0, 0) <= -1 + 1e-6) continue;
    TangentVector l = log_map(a, b);
    double cosab = (a.coords.transpose() * b.coords)(0, 0);
    CHECK(l.norm() == doctest::Approx(std::acos(std::clamp(cosab, -1.0, 1.0)))
                          .epsilon(1e-10));
    CHECK((exp_map(a, l).coords - b.coords).norm() < 1e-9);
  }

  ManifoldPoint antipode = sphere_point({-1, 0, 0});
  CHECK_THROWS_AS(log_map(x, antipode), DomainError);
  CHECK_THROWS_AS(exp_map(x, TangentVector(x, Eigen::Vector3d(0, 4.0, 0))), DomainError);

  ManifoldPoint frame(Manifold::grassmann(3, 1), Eigen::Vector3d(1, 0, 0));
  CHECK_THROWS_AS(log_map(frame, frame), UnsupportedMapError);
}

TEST_CASE("parallel transport is an isometry along geodesics") {
  RngStream rng(5, 0);
  ManifoldPoint x = random_point(Manifold::sphere(5), rng);
  TangentVector v = random_tangent(x, rng, 0.8);
  TangentVector same = parallel_transport_sphere(x, x, v);
  CHECK((same.vec - v.vec).norm() < 1e-12);

  for (int i = 0; i < 30; ++i) {
    ManifoldPoint a = random_point(Manifold::sphere(5), rng);
    ManifoldPoint b = exp_map(a, random_tangent(a, rng, 0.2 + 2.0 * rng.uniform()));
    TangentVector w = random_tangent(a, rng, 0.1 + rng.uniform());
    TangentVector moved = parallel_transport_sphere(a, b, w);
    CHECK(std::abs(moved.norm() - w.norm()) < 1e-10);
    TangentVector along = parallel_transport_sphere(a, b, log_map(a, b));
    CHECK((along.vec + log_map(b, a).vec).norm() < 1e-9);
  }

  ManifoldPoint e(Manifold::euclidean(3), Eigen::Vector3d(1, 2, 3));
  CHECK_THROWS_AS(parallel_transport_sphere(e, e, TangentVector(e, Eigen::Vector3d(1, 0, 0))),
                  UnsupportedMapError);
}

TEST_CASE("principal angles") {
  RngStream rng(6, 0);
  ManifoldPoint x = random_point(Manifold::grassmann(6, 2), rng);
  Eigen::MatrixXd q = haar_orthogonal(2, rng);
  ManifoldPoint xq(x.space, x.coords * q);
  CHECK(principal_angles(x, xq).theta.cwiseAbs().maxCoeff() < 1e-7);

  for (double t : {0.1, 0.4, M_PI / 2 - 0.01}) {
    ManifoldPoint a(Manifold::grassmann(2, 1), Eigen::Vector2d(1, 0));
    ManifoldPoint b(Manifold::grassmann(2, 1), Eigen::Vector2d(std::cos(t), std::sin(t)));
    CHECK(principal_angles(a, b).theta(0) == doctest::Approx(t).epsilon(1e-12));
  }
  ManifoldPoint e1(Manifold::grassmann(2, 1), Eigen::Vector2d(1, 0));
  ManifoldPoint e2(Manifold::grassmann(2, 1), Eigen::Vector2d(0, 1));
  CHECK(principal_angles(e1, e2).theta(0) == doctest::Approx(M_PI / 2).epsilon(1e-12));

  ManifoldPoint other = random_point(Manifold::grassmann(6, 3), rng);
  CHECK_THROWS_AS(principal_angles(x, other), DimensionError);

  // angles depend only on the subspaces: rotate both frames independently
  for (int i = 0; i < 10; ++i) {
    ManifoldPoint a = random_point(Manifold::grassmann(7, 3), rng);
    ManifoldPoint b = random_point(Manifold::grassmann(7, 3), rng);
    ManifoldPoint aq(a.space, a.coords * haar_orthogonal(3, rng));
    ManifoldPoint bq(b.space, b.coords * haar_orthogonal(3, rng));
    CHECK((principal_angles(a, b).theta - principal_angles(aq, bq).theta)
              .cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("subspace distances against hand values") {
  RngStream rng(7, 0);
  ManifoldPoint x = random_point(Manifold::grassmann(5, 2), rng);
  SubspaceDistances same = subspace_distances(x, x);
  CHECK(same.arc < 1e-7);
  CHECK(same.frobenius < 1e-7);
  CHECK(same.retraction < 1e-7);

  Eigen::VectorXd theta(1);
  theta << M_PI / 6;
  auto [a, b] = grassmann_pair(4, 1, theta, rng);
  SubspaceDistances d = subspace_distances(a, b);
  CHECK(d.arc == doctest::Approx(0.5235987755982988).epsilon(1e-10));
  CHECK(d.frobenius == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(d.retraction == doctest::Approx(0.5773502691896258).epsilon(1e-10));

  theta << M_PI / 4;
  auto [c, e] = grassmann_pair(4, 1, theta, rng);
  SubspaceDistances d2 = subspace_distances(c, e);
  CHECK(M_PI_2 * d2.retraction == doctest::Approx(1.5707963267948966).epsilon(1e-9));
  CHECK(M_PI_2 * d2.frobenius == doctest::Approx(1.1107207345395915).epsilon(1e-9));
  CHECK(d2.arc == doctest::Approx(0.7853981633974483).epsilon(1e-9));
  CHECK(d2.retraction / std::sqrt(2.0) == doctest::Approx(0.7071067811865476).epsilon(1e-9));

  // cross-validation of d_F against the projector form
  for (int i = 0; i < 30; ++i) {
    ManifoldPoint p = random_point(Manifold::grassmann(7, 3), rng);
    ManifoldPoint q2 = random_point(Manifold::grassmann(7, 3), rng);
    double lhs = subspace_distances(p, q2).frobenius;
    double rhs = (p.coords * p.coords.transpose() - q2.coords * q2.coords.transpose())
                     .norm() / std::sqrt(2.0);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
  }

  // +inf sentinel at 90 degrees
  ManifoldPoint e1(Manifold::grassmann(2, 1), Eigen::Vector2d(1, 0));
  ManifoldPoint e2(Manifold::grassmann(2, 1), Eigen::Vector2d(0, 1));
  CHECK(std::isinf(subspace_distances(e1, e2).retraction));
}

TEST_CASE("retraction axioms hold to first and second order") {
  RngStream rng(8, 0);
  for (const Manifold& space : {Manifold::sphere(5), Manifold::grassmann(7, 2)}) {
    for (int i = 0; i < 20; ++i) {
      ManifoldPoint x = random_point(space, rng);
      TangentVector xi = random_tangent(x, rng, 1.0);

      std::vector<double> lt, le;
      for (double t : {1e-2, 1e-3, 1e-4, 1e-5}) {
        ManifoldPoint y = retract(x, TangentVector(x, t * xi.vec));
        lt.push_back(std::log10(t));
        le.push_back(std::log10((y.coords - x.coords - t * xi.vec).norm()));
      }
      CHECK(lsq_slope(lt, le) >= 1.9);

      const double h = 1e-3;
      ManifoldPoint fwd = retract(x, TangentVector(x, h * xi.vec));
      ManifoldPoint bwd = retract(x, TangentVector(x, -h * xi.vec));
      Eigen::MatrixXd accel = (fwd.coords - 2.0 * x.coords + bwd.coords) / (h * h);
      CHECK(project_tangent(x, accel).norm() <= 1e-4);
    }
  }
}

TEST_CASE("inverse retraction is consistent for moderate steps") {
  RngStream rng(9, 0);
  for (const Manifold& space :
       {Manifold::euclidean(4), Manifold::sphere(4), Manifold::grassmann(6, 2)}) {
    for (int i = 0; i < 30; ++i) {
      ManifoldPoint x = random_point(space, rng);
      TangentVector v = random_tangent(x, rng, 0.5 * rng.uniform());
      TangentVector w = inverse_retract(x, retract(x, v));
      CHECK((w.vec - v.vec).norm() < 1e-8);
    }
  }
}

TEST_CASE("distance equivalence chain over random pairs") {
  RngStream rng(10, 0);
  for (int i = 0; i < 1000; ++i) {
    int k = 1 + static_cast<int>(rng.uniform() * 3);
    int d = 2 * k + static_cast<int>(rng.uniform() * (10 - 2 * k + 1));
    Eigen::VectorXd theta(k);
    for (int j = 0; j < k; ++j) theta(j) = rng.uniform() * M_PI / 4;
    auto [x, y] = grassmann_pair(d, k, theta, rng);
    SubspaceDistances dist = subspace_distances(x, y);
    const double slack = 1e-12;
    CHECK(M_PI_2 * dist.retraction >= M_PI_2 * dist.frobenius - slack);
    CHECK(M_PI_2 * dist.frobenius >= dist.arc - slack);
    CHECK(dist.arc >= dist.retraction / std::sqrt(2.0) - slack);
  }
}

TEST_CASE("retraction norm matches arc length locally") {
  RngStream rng(11, 0);
  for (int i = 0; i < 100; ++i) {
    int k = 1 + static_cast<int>(rng.uniform() * 3);
    int d = 2 * k + static_cast<int>(rng.uniform() * 3);
    Eigen::VectorXd theta(k);
    for (int j = 0; j < k; ++j) theta(j) = 5e-3 * rng.uniform();
    auto [x, y] = grassmann_pair(d, k, theta, rng);
    SubspaceDistances dist = subspace_distances(x, y);
    if (dist.arc > 1e-2 || dist.arc == 0) continue;
    CHECK(dist.retraction / dist.arc >= 0.99);
    CHECK(dist.retraction / dist.arc <= 1.01);
  }
}

TEST_CASE("squared inverse-retraction norm is convex near the base (k=1)") {
  RngStream rng(12, 0);
  const double h = 1e-3;
  for (int i = 0; i < 100; ++i) {
    ManifoldPoint x_star = random_point(Manifold::grassmann(5, 1), rng);
    ManifoldPoint y = retract(x_star, random_tangent(x_star, rng, 0.3 * rng.uniform()));
    if (std::abs((x_star.coords.transpose() * y.coords)(0, 0)) < 0.95) continue;
    TangentVector v = random_tangent(y, rng, 1.0);
    auto g = [&](double t) {
      return inverse_retract(x_star, retract(y, TangentVector(y, t * v.vec)))
          .vec.squaredNorm();
    };
    CHECK((g(h) - 2.0 * g(0.0) + g(-h)) / (h * h) >= 0.0);
  }
}
