#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "systola/error.hpp"
#include "systola/normed_space.hpp"

using namespace systola;

namespace {

Eigen::MatrixXd square_vertices() {
  Eigen::MatrixXd v(2, 4);
  v << 1, 1, -1, -1, 1, -1, 1, -1;
  return v;
}

// Largest volume of a scaled copy of q + eps*d that still fits inside the
// facets, relative to q (volume is det^{-1/2}).
double perturbed_volume_ratio(const Eigen::MatrixXd& normals, const Eigen::MatrixXd& q,
                              const Eigen::MatrixXd& d, double eps) {
  const Eigen::MatrixXd qp = q + eps * d;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(qp);
  if (es.eigenvalues().minCoeff() <= 0) return 0.0;
  const Eigen::MatrixXd w = qp.inverse();
  double worst = 0.0;
  for (int j = 0; j < normals.cols(); ++j) worst = std::max(worst, normals.col(j).dot(w * normals.col(j)));
  const Eigen::MatrixXd fitted = qp * worst;
  return std::sqrt(q.determinant() / fitted.determinant());
}

void check_decomposition(const NormBody& norm, const Rank1Decomposition& d, const Eigen::MatrixXd& q) {
  const int b = norm.dim();
  CHECK(d.count() <= static_cast<std::size_t>(b * (b + 1) / 2 + 1));
  double sum = 0.0;
  for (std::size_t i = 0; i < d.count(); ++i) {
    CHECK(d.weights[i] > 0);
    sum += d.weights[i];
    CHECK(std::abs(norm.dual_norm(d.functionals[i]) - 1.0) < 1e-6);
  }
  CHECK(std::abs(sum - b) < 1e-8);
  CHECK((d.reconstruct() - q).norm() < 1e-7);
}

}  // namespace

TEST_SUITE("normed_space") {
  TEST_CASE("dual norms") {
    const NormBody euclid = NormBody::ellipsoid(Eigen::MatrixXd::Identity(2, 2));
    CHECK(euclid.dual_norm(Eigen::Vector2d(3, 4)) == doctest::Approx(5.0));
    const NormBody square = NormBody::polytope(square_vertices());
    CHECK(square.dual_norm(Eigen::Vector2d(1, 1)) == doctest::Approx(2.0));
    const Eigen::MatrixXd hex = testing::regular_hexagon();
    const NormBody hexagon = NormBody::polytope(hex);
    const Eigen::Vector2d l(1, 0);
    CHECK(hexagon.dual_norm(l) == doctest::Approx((hex.transpose() * l).maxCoeff()));
    CHECK(hexagon.dual_norm(Eigen::Vector2d::Zero()) == 0.0);
  }

  TEST_CASE("norm and dual norm are consistent for every representation") {
    testing::Rng rng(5);
    const Eigen::MatrixXd v = testing::random_symmetric_polytope(rng, 3, 7);
    const NormBody poly = NormBody::polytope(v);
    const NormBody fac = NormBody::facets(poly.facet_normals());
    for (int t = 0; t < 20; ++t) {
      const Eigen::VectorXd x = testing::random_vector(rng, 3);
      CHECK(poly.norm(x) == doctest::Approx(fac.norm(x)).epsilon(1e-8));
      CHECK(poly.norm(-x) == doctest::Approx(poly.norm(x)).epsilon(1e-12));
      CHECK(poly.dual_norm(x) == doctest::Approx(fac.dual_norm(x)).epsilon(1e-8));
      // Hoelder: <l, x> <= |l|* |x|.
      const Eigen::VectorXd l = testing::random_vector(rng, 3);
      CHECK(l.dot(x) <= poly.dual_norm(l) * poly.norm(x) + 1e-12);
    }
  }

  TEST_CASE("invalid norms are rejected") {
    Eigen::MatrixXd lopsided(2, 3);
    lopsided << 1, 0, -1, 0, 1, 0;
    CHECK_THROWS_AS(NormBody::polytope(lopsided), Error);
    CHECK_THROWS_AS(NormBody::polytope(Eigen::MatrixXd(2, 0)), Error);
    Eigen::MatrixXd dirs(1, 2);
    dirs << 1, -1;
    CHECK_THROWS_AS(NormBody::samples(dirs, Eigen::Vector2d(1, 0)), Error);
  }

  TEST_CASE("John ellipsoids of symmetric examples") {
    CHECK((john_ellipsoid(NormBody::polytope(square_vertices())).quadratic_form -
           Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-9);
    const Eigen::MatrixXd q = Eigen::Matrix2d(Eigen::Vector2d(2.0, 0.5).asDiagonal());
    CHECK((john_ellipsoid(NormBody::ellipsoid(q)).quadratic_form - q).norm() == 0.0);
    // Hexagon with inradius sqrt(3)/2: the inscribed disk has Q = (4/3) I.
    const JohnResult hex = john_ellipsoid_certified(NormBody::polytope(testing::regular_hexagon()));
    CHECK((hex.ellipsoid.quadratic_form - (4.0 / 3.0) * Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-9);
    CHECK(hex.contact_count == 3);
    CHECK(hex.duality_gap < 1e-12);
  }

  TEST_CASE("rank-1 decompositions of symmetric examples") {
    {
      const NormBody euclid = NormBody::ellipsoid(Eigen::MatrixXd::Identity(2, 2));
      const auto d = rank1_decomposition(euclid, john_ellipsoid(euclid));
      CHECK(d.count() == 2);
      for (double w : d.weights) CHECK(w == doctest::Approx(1.0));
      CHECK(std::abs(d.functionals[0].dot(d.functionals[1])) < 1e-12);
    }
    {
      const NormBody square = NormBody::polytope(square_vertices());
      const auto d = rank1_decomposition(square, john_ellipsoid(square));
      REQUIRE(d.count() == 2);
      CHECK(d.weights[0] == doctest::Approx(1.0));
      CHECK(d.weights[1] == doctest::Approx(1.0));
      CHECK((d.functionals[0] - Eigen::Vector2d(0, 1)).norm() < 1e-9);
      CHECK((d.functionals[1] - Eigen::Vector2d(1, 0)).norm() < 1e-9);
    }
    {
      const NormBody hexagon = NormBody::polytope(testing::regular_hexagon());
      const Ellipsoid e = john_ellipsoid(hexagon);
      const auto d = rank1_decomposition(hexagon, e);
      REQUIRE(d.count() == 3);
      for (double w : d.weights) CHECK(w == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
      for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
          const double c = d.functionals[i].normalized().dot(d.functionals[j].normalized());
          CHECK(std::abs(std::abs(c) - 0.5) < 1e-9);
        }
      check_decomposition(hexagon, d, e.quadratic_form);
    }
  }

  TEST_CASE("a non-optimal ellipsoid has too few contacts") {
    const NormBody square = NormBody::polytope(square_vertices());
    Ellipsoid small{4.0 * Eigen::MatrixXd::Identity(2, 2)};
    try {
      rank1_decomposition(square, small);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kDegenerateContact);
    }
  }

  TEST_CASE("isometry embedding") {
    testing::Rng rng(17);
    const NormBody hexagon = NormBody::polytope(testing::regular_hexagon());
    const Ellipsoid e = john_ellipsoid(hexagon);
    const IsometryEmbedding emb(rank1_decomposition(hexagon, e));
    CHECK(emb.matrix().rows() == 3);
    CHECK(emb(Eigen::Vector2d::Zero()).norm() == 0.0);
    for (int t = 0; t < 100; ++t) {
      const Eigen::VectorXd x = testing::random_vector(rng, 2);
      CHECK(std::abs(emb(x).squaredNorm() - (4.0 / 3.0) * x.squaredNorm()) < 1e-8 * x.squaredNorm());
      CHECK((emb.projection_inverse() * emb(x) - x).norm() < 1e-10);
    }
    const NormBody euclid = NormBody::ellipsoid(Eigen::MatrixXd::Identity(2, 2));
    const IsometryEmbedding id(rank1_decomposition(euclid, john_ellipsoid(euclid)));
    CHECK((id.matrix().transpose() * id.matrix() - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-12);
  }

  TEST_CASE("sampled norms report their discretization error") {
    const int m = 128;
    Eigen::MatrixXd dirs(2, m);
    Eigen::VectorXd vals(m);
    for (int k = 0; k < m; ++k) {
      const double a = 2 * M_PI * k / m;
      dirs.col(k) << std::cos(a), std::sin(a);
      vals(k) = 1.0;
    }
    const NormBody round = NormBody::samples(dirs, vals);
    CHECK(round.discretization_error() < 1e-9);
    // A dent: one antipodal pair of samples lies strictly inside the hull.
    vals(0) = vals(m / 2) = 1.5;
    CHECK(NormBody::samples(dirs, vals).discretization_error() > 0.3);
  }

  TEST_CASE("property: random polytope John ellipsoids are inscribed and locally optimal") {
    testing::Rng rng(31);
    for (int trial = 0; trial < 12; ++trial) {
      const int b = 2 + trial % 3;
      const NormBody norm = NormBody::polytope(testing::random_symmetric_polytope(rng, b, b + 3));
      const Eigen::MatrixXd q = john_ellipsoid(norm).quadratic_form;
      const Eigen::MatrixXd normals = norm.facet_normals();
      const Eigen::MatrixXd w = q.inverse();
      for (int j = 0; j < normals.cols(); ++j) CHECK(normals.col(j).dot(w * normals.col(j)) <= 1 + 1e-9);
      for (int t = 0; t < 20; ++t) {
        Eigen::MatrixXd d = Eigen::MatrixXd::Random(b, b);
        d = 0.5 * (d + d.transpose());
        CHECK(perturbed_volume_ratio(normals, q, d, 1e-3) <= 1 + 1e-8);
      }
      check_decomposition(norm, rank1_decomposition(norm, john_ellipsoid(norm)), q);
    }
  }

  TEST_CASE("property: decompositions are equivariant under linear maps") {
    testing::Rng rng(41);
    for (int trial = 0; trial < 6; ++trial) {
      const int b = 2 + trial % 2;
      const Eigen::MatrixXd v = testing::random_symmetric_polytope(rng, b, b + 2);
      Eigen::MatrixXd t = Eigen::MatrixXd::Identity(b, b) + 0.4 * Eigen::MatrixXd::Random(b, b);
      // |x|_T = |Tx| has unit ball T^{-1} B.
      const Eigen::MatrixXd q = john_ellipsoid(NormBody::polytope(v)).quadratic_form;
      const Eigen::MatrixXd qt = john_ellipsoid(NormBody::polytope(t.inverse() * v)).quadratic_form;
      CHECK((qt - t.transpose() * q * t).norm() < 1e-6 * q.norm());
    }
  }
}
