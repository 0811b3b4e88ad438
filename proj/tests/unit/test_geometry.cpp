#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "rbmm/errors.hpp"
#include "rbmm/geometry.hpp"
#include "support.hpp"

namespace rbmm {
namespace {

using test::col;
using test::frob;

constexpr double kPi = std::numbers::pi;

TEST(Manifold, InjectivityFloors) {
  EXPECT_TRUE(std::isinf(Manifold::euclidean(3).injectivity_floor()));
  EXPECT_TRUE(std::isinf(Manifold::spd(3).injectivity_floor()));
  EXPECT_TRUE(std::isinf(Manifold::fixed_rank(4, 3, 2).injectivity_floor()));
  EXPECT_DOUBLE_EQ(Manifold::sphere(3).injectivity_floor(), kPi);
  EXPECT_DOUBLE_EQ(Manifold::stiefel(5, 2).injectivity_floor(), 0.89 * kPi);
  for (const Manifold& m : {Manifold::euclidean(2), Manifold::sphere(3), Manifold::stiefel(4, 2),
                            Manifold::spd(2), Manifold::fixed_rank(3, 3, 1)})
    EXPECT_DOUBLE_EQ(m.r_hat(), 1.0);
}

TEST(Manifold, ShapeContracts) {
  EXPECT_THROW(Manifold::stiefel(2, 3), ContractViolation);
  EXPECT_THROW(Manifold::sphere(1), ContractViolation);
  EXPECT_THROW(Manifold::fixed_rank(3, 2, 3), ContractViolation);
}

TEST(Point, InvariantsAreChecked) {
  EXPECT_THROW(make_point(Manifold::sphere(3), col({1, 1, 0})), ContractViolation);
  EXPECT_THROW(make_point(Manifold::spd(2), Matrix::Identity(2, 2) * -1.0), ContractViolation);
  Matrix not_orth(3, 2);
  not_orth << 1, 1, 0, 1, 0, 0;
  EXPECT_THROW(make_point(Manifold::stiefel(3, 2), not_orth), ContractViolation);
  EXPECT_THROW(make_point(Manifold::fixed_rank(2, 2, 2), Matrix::Ones(2, 2)), ContractViolation);
  EXPECT_NO_THROW(make_point(Manifold::sphere(3), col({0, 0, 1})));
}

TEST(Inner, SpdMetricAtIdentity) {
  const Point x = make_point(Manifold::spd(2), Matrix::Identity(2, 2));
  const TangentVector u = make_tangent(x, Matrix::Identity(2, 2));
  EXPECT_NEAR(inner(x, u, u), 1.0, 1e-15);
}

TEST(Inner, EuclideanZeroAndSphereOrthogonal) {
  const Point e = make_point(Manifold::euclidean(2), col({1, 2}));
  EXPECT_EQ(inner(e, zero_tangent(e), zero_tangent(e)), 0.0);
  const Point s = make_point(Manifold::sphere(3), col({1, 0, 0}));
  EXPECT_EQ(inner(s, make_tangent(s, col({0, 1, 0})), make_tangent(s, col({0, 0, 1}))), 0.0);
}

TEST(Inner, MismatchedBaseIsRejected) {
  const Point a = make_point(Manifold::sphere(3), col({1, 0, 0}));
  const Point b = make_point(Manifold::sphere(3), col({0, 1, 0}));
  EXPECT_THROW(inner(a, zero_tangent(a), zero_tangent(b)), ContractViolation);
}

TEST(ProjTangent, Examples) {
  const Point e = make_point(Manifold::euclidean(2), col({0, 0}));
  EXPECT_EQ(proj_tangent(e, col({3, -1})).data, col({3, -1}));

  const Point s = make_point(Manifold::sphere(3), col({1, 0, 0}));
  EXPECT_LT(frob(proj_tangent(s, col({3, 1, 0})).data, col({0, 1, 0})), 1e-15);

  Matrix x(3, 1);
  x << 1, 0, 0;
  const Point st = make_point(Manifold::stiefel(3, 1), x);
  EXPECT_LT(frob(proj_tangent(st, col({0, 2, -1})).data, col({0, 2, -1})), 1e-15);

  EXPECT_THROW(proj_tangent(s, col({1, 2})), ContractViolation);
}

TEST(EgradToRgrad, Examples) {
  const Point e = make_point(Manifold::euclidean(2), col({5, 1}));
  EXPECT_EQ(egrad_to_rgrad(e, col({1, 2})).data, col({1, 2}));

  Matrix g(2, 2);
  g << 1, 0.5, 0.5, -2;
  const Point spd = make_point(Manifold::spd(2), Matrix::Identity(2, 2));
  EXPECT_LT(frob(egrad_to_rgrad(spd, g).data, 2.0 * g), 1e-15);

  Rng rng(3);
  const Point s = random_point(Manifold::sphere(3), rng);
  for (int i = 0; i < 3; ++i) {
    const Matrix v = gaussian(rng, 3, 1);
    EXPECT_LT(frob(egrad_to_rgrad(s, v).data, proj_tangent(s, v).data), 1e-15);
  }
}

TEST(Retract, Examples) {
  const Point s = make_point(Manifold::sphere(2), col({1, 0}));
  const Point r = retract(s, make_tangent(s, col({0, 1})));
  EXPECT_LT(frob(r.data, col({1 / std::sqrt(2.0), 1 / std::sqrt(2.0)})), 1e-15);

  Rng rng(4);
  for (const Manifold& m : {Manifold::euclidean(3, 2), Manifold::sphere(4), Manifold::stiefel(3, 2),
                            Manifold::spd(3), Manifold::fixed_rank(4, 3, 2)}) {
    const Point x = random_point(m, rng);
    EXPECT_LT(frob(retract(x, zero_tangent(x)).data, x.data), 1e-12) << m.describe();
  }
}

TEST(Retract, FixedRankDegenerateStepThrows) {
  Matrix a = Matrix::Zero(3, 3);
  a(0, 0) = 1.0;
  const Point x = make_point(Manifold::fixed_rank(3, 3, 1), a);
  EXPECT_THROW(retract(x, make_tangent(x, -a)), DegenerateInput);
}

TEST(ExpMap, Examples) {
  const Point e = make_point(Manifold::euclidean(2), col({0, 0}));
  EXPECT_EQ(exp_map(e, make_tangent(e, col({1, 2}))).data, col({1, 2}));

  const Point s = make_point(Manifold::sphere(3), col({1, 0, 0}));
  EXPECT_LT(frob(exp_map(s, make_tangent(s, col({0, kPi / 2, 0}))).data, col({0, 1, 0})), 1e-15);

  const Point i2 = make_point(Manifold::spd(2), Matrix::Identity(2, 2));
  EXPECT_LT(frob(exp_map(i2, make_tangent(i2, Matrix::Identity(2, 2))).data,
                 std::exp(1.0) * Matrix::Identity(2, 2)),
            1e-14);

  const Point st = make_point(Manifold::stiefel(3, 1), col({1, 0, 0}));
  EXPECT_THROW(exp_map(st, zero_tangent(st)), UnsupportedKind);
}

TEST(LogMap, Examples) {
  const Point i2 = make_point(Manifold::spd(2), Matrix::Identity(2, 2));
  const Point y = make_point(Manifold::spd(2), std::exp(2.0) * Matrix::Identity(2, 2));
  const TangentVector v = log_map(i2, y);
  EXPECT_LT(frob(v.data, 2.0 * Matrix::Identity(2, 2)), 1e-14);
  EXPECT_NEAR(norm(i2, v), 2.0, 1e-14);

  const Point a = make_point(Manifold::euclidean(2), col({1, 1}));
  const Point b = make_point(Manifold::euclidean(2), col({4, -1}));
  EXPECT_EQ(log_map(a, b).data, col({3, -2}));
  EXPECT_EQ(log_map(a, a).data.norm(), 0.0);

  const Point s = make_point(Manifold::sphere(3), col({1, 0, 0}));
  EXPECT_LT(log_map(s, s).data.norm(), 1e-15);
  EXPECT_THROW(log_map(s, make_point(Manifold::sphere(3), col({-1, 0, 0}))), DegenerateInput);
}

TEST(Transport, Examples) {
  const Point x = make_point(Manifold::sphere(3), col({1, 0, 0}));
  const Point y = make_point(Manifold::sphere(3), col({0, 1, 0}));
  const TangentVector u = make_tangent(x, col({0, 1, 0}));
  EXPECT_LT(frob(transport(x, y, u).data, col({-1, 0, 0})), 1e-15);
  EXPECT_LT(frob(transport(x, x, u).data, u.data), 1e-15);

  const Point e = make_point(Manifold::euclidean(2), col({0, 0}));
  const Point f = make_point(Manifold::euclidean(2), col({1, 3}));
  EXPECT_EQ(transport(e, f, make_tangent(e, col({2, 5}))).data, col({2, 5}));
}

TEST(Dist, Examples) {
  const Point i2 = make_point(Manifold::spd(2), Matrix::Identity(2, 2));
  const Point y = make_point(Manifold::spd(2), std::exp(2.0) * Matrix::Identity(2, 2));
  EXPECT_NEAR(dist(i2, y), 2.0, 1e-14);
  EXPECT_EQ(dist(i2, i2), 0.0);

  const Manifold plane = Manifold::euclidean(1);
  ProductPoint a{{make_point(plane, test::scalar(0)), make_point(plane, test::scalar(0))}};
  ProductPoint b{{make_point(plane, test::scalar(3)), make_point(plane, test::scalar(4))}};
  EXPECT_DOUBLE_EQ(dist(a, b), 5.0);

  ProductPoint c{{make_point(plane, test::scalar(0))}};
  EXPECT_THROW(dist(a, c), ContractViolation);
}

TEST(GradDistSq, Examples) {
  const Point x = make_point(Manifold::euclidean(2), col({1, 2}));
  const Point p = make_point(Manifold::euclidean(2), col({-1, 5}));
  EXPECT_LT(frob(grad_dist_sq(x, p).data, 2.0 * (x.data - p.data)), 1e-15);
  EXPECT_EQ(grad_dist_sq(x, x).data.norm(), 0.0);

  const Point i2 = make_point(Manifold::spd(2), Matrix::Identity(2, 2));
  const Point q = make_point(Manifold::spd(2), std::exp(2.0) * Matrix::Identity(2, 2));
  EXPECT_LT(frob(grad_dist_sq(i2, q).data, -4.0 * Matrix::Identity(2, 2)), 1e-13);
}

TEST(ProjManifold, Examples) {
  Matrix q(3, 2);
  q << 1, 0, 0, 1, 0, 0;
  EXPECT_LT(frob(proj_manifold(Manifold::stiefel(3, 2), q).data, q), 1e-15);

  Matrix x(3, 2);
  x << 1, 1, 1, -1, 0, 0;
  EXPECT_LT(frob(proj_manifold(Manifold::stiefel(3, 2), x).data, x / std::sqrt(2.0)), 1e-15);

  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 3;
  d(1, 1) = 1;
  Matrix expect = Matrix::Zero(2, 2);
  expect(0, 0) = 3;
  EXPECT_LT(frob(proj_manifold(Manifold::fixed_rank(2, 2, 1), d).data, expect), 1e-15);

  EXPECT_THROW(proj_manifold(Manifold::fixed_rank(2, 2, 1), Matrix::Identity(2, 2)), DegenerateInput);
  Matrix deficient(3, 2);
  deficient << 1, 1, 1, 1, 0, 0;
  EXPECT_THROW(proj_manifold(Manifold::stiefel(3, 2), deficient), DegenerateInput);
}

TEST(ProjManifold, DeterministicSignConvention) {
  Rng rng(9);
  const Matrix x = gaussian(rng, 5, 2);
  const Matrix a = proj_manifold(Manifold::stiefel(5, 2), x).data;
  const Matrix b = proj_manifold(Manifold::stiefel(5, 2), x).data;
  EXPECT_EQ(a, b);
}

// Hand-rolled generators: random points and tangents drawn from seeded streams.

TEST(GeometryProperty, ExpLogRoundTrip) {
  for (const Manifold& m : {Manifold::euclidean(3, 2), Manifold::sphere(4), Manifold::spd(3)}) {
    test::for_seeds(100, [&](Rng& rng) {
      const Point x = random_point(m, rng);
      const double len = uniform(rng, 0.0, m.kind() == ManifoldKind::Sphere ? kPi / 2 : 2.0);
      const Point y = exp_map(x, scale(random_unit_tangent(x, rng), len));
      EXPECT_LE(frob(exp_map(x, log_map(x, y)).data, y.data), 1e-8) << m.describe();
      EXPECT_NEAR(norm(x, log_map(x, y)), dist(x, y), 1e-8) << m.describe();
    });
  }
}

TEST(GeometryProperty, TransportIsometry) {
  for (const Manifold& m : {Manifold::euclidean(3), Manifold::sphere(5), Manifold::spd(3)}) {
    test::for_seeds(100, [&](Rng& rng) {
      const Point x = random_point(m, rng);
      const Point y = exp_map(x, scale(random_unit_tangent(x, rng), uniform(rng, 0.0, 1.5)));
      const TangentVector u = scale(random_unit_tangent(x, rng), 2.0);
      const TangentVector v = random_unit_tangent(x, rng);
      EXPECT_NEAR(inner(y, transport(x, y, u), transport(x, y, v)), inner(x, u, v), 1e-10);
    });
  }
}

TEST(GeometryProperty, ProjTangentIdempotent) {
  for (const Manifold& m : {Manifold::sphere(4), Manifold::stiefel(5, 2), Manifold::spd(3),
                            Manifold::fixed_rank(5, 4, 2)}) {
    test::for_seeds(50, [&](Rng& rng) {
      const Point x = random_point(m, rng);
      const TangentVector once = proj_tangent(x, gaussian(rng, m.rows(), m.cols()));
      EXPECT_LE(frob(proj_tangent(x, once.data).data, once.data), 1e-10);
      EXPECT_LE(tangent_residual(once), 1e-10);
    });
  }
}

TEST(GeometryProperty, RetractStaysOnManifold) {
  for (const Manifold& m : {Manifold::sphere(4), Manifold::stiefel(5, 2), Manifold::spd(3),
                            Manifold::fixed_rank(5, 4, 2)}) {
    test::for_seeds(50, [&](Rng& rng) {
      const Point x = random_point(m, rng);
      const Point y = retract(x, scale(random_unit_tangent(x, rng), uniform(rng, 0.0, 0.5)));
      EXPECT_TRUE(is_valid_point(y)) << m.describe();
    });
  }
}

TEST(GeometryProperty, SphereChordBelowArc) {
  const Manifold m = Manifold::sphere(3);
  test::for_seeds(100, [&](Rng& rng) {
    const Point x = random_point(m, rng);
    const Point y = random_point(m, rng);
    EXPECT_LE((x.data - y.data).norm(), dist(x, y) + 1e-15);
  });
}

TEST(GeometryProperty, StiefelDistIsFrobenius) {
  const Manifold m = Manifold::stiefel(6, 3);
  test::for_seeds(20, [&](Rng& rng) {
    const Point x = random_point(m, rng);
    const Point y = random_point(m, rng);
    EXPECT_DOUBLE_EQ(dist(x, y), (x.data - y.data).norm());
  });
}

TEST(GeometryProperty, StiefelProjectionIsNearest) {
  const Manifold m = Manifold::stiefel(5, 2);
  test::for_seeds(10, [&](Rng& rng) {
    const Matrix x = gaussian(rng, 5, 2);
    const double best = (x - proj_manifold(m, x).data).norm();
    for (int i = 0; i < 100; ++i) EXPECT_LE(best, (x - random_point(m, rng).data).norm() + 1e-12);
  });
}

TEST(GeometryProperty, DistSymmetric) {
  for (const Manifold& m : {Manifold::sphere(3), Manifold::spd(3), Manifold::euclidean(2, 2)}) {
    test::for_seeds(30, [&](Rng& rng) {
      const Point x = random_point(m, rng);
      const Point y = random_point(m, rng);
      EXPECT_NEAR(dist(x, y), dist(y, x), 1e-12);
    });
  }
}

TEST(SpdFunctions, FloorIsEnforced) {
  Matrix a = Matrix::Identity(2, 2);
  a(1, 1) = 1e-14;
  EXPECT_THROW(spd::log(a), DegenerateInput);
  EXPECT_THROW(spd::inv_sqrt(a), DegenerateInput);
  Matrix b(2, 2);
  b << 2, 1, 1, 2;
  EXPECT_LT(frob(spd::exp(spd::log(b)), b), 1e-13);
  EXPECT_LT(frob(spd::sqrt(b) * spd::sqrt(b), b), 1e-13);
}

}  // namespace
}  // namespace rbmm
