#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "systola/error.hpp"
#include "systola/io.hpp"
#include "systola/mesh.hpp"

using namespace systola;

namespace {

Lattice square() { return Lattice::from_gram(Eigen::MatrixXd::Identity(2, 2)); }
Lattice hexagonal() { return Lattice::from_gram(testing::hexagonal_gram()); }

// Coordinate form dx_i on a torus mesh: the i-th lift displacement of each edge.
Form coordinate_form(const Mesh& mesh, int i) {
  return mesh.edge_displacements()->row(i).transpose();
}

void check_homology(const Mesh& mesh, int expected_b1) {
  const HomologyData h = homology_basis(mesh);
  CHECK(h.b1 == expected_b1);
  CHECK(h.torsion.empty());
  CHECK((h.pairing() - Eigen::MatrixXd::Identity(h.b1, h.b1)).norm() == 0.0);
  const Eigen::SparseMatrix<int> d1 = mesh.boundary(1);
  const Eigen::SparseMatrix<int> d2 = mesh.boundary(2);
  for (int i = 0; i < h.b1; ++i) {
    const Eigen::VectorXi z = h.h1_basis[i].cast<int>();
    const Eigen::VectorXi c = h.h1_cobasis[i].cast<int>();
    CHECK((d1 * z).cwiseAbs().maxCoeff() == 0);
    CHECK((Eigen::SparseMatrix<int>(d2.transpose()) * c).cwiseAbs().maxCoeff() == 0);
  }
}

}  // namespace

TEST_SUITE("mesh") {
  TEST_CASE("flat torus sizes and volumes") {
    const Mesh m1 = flat_torus_mesh(square(), 1);
    CHECK(m1.num_top() == 2);
    CHECK(m1.num_vertices() == 1);
    CHECK(m1.volume() == doctest::Approx(1.0));
    const Mesh hex = flat_torus_mesh(hexagonal(), 4);
    CHECK(hex.num_top() == 32);
    CHECK(std::abs(hex.volume() - std::sqrt(3.0) / 2) < 1e-10);
    const Mesh cube = flat_torus_mesh(Lattice::from_gram(Eigen::MatrixXd::Identity(3, 3)), 2);
    CHECK(cube.num_top() == 48);
    CHECK(std::abs(cube.volume() - 1.0) < 1e-10);
  }

  TEST_CASE("flat torus volume equals covolume at every refinement") {
    testing::Rng rng(8);
    for (int trial = 0; trial < 6; ++trial) {
      const int b = 2 + trial % 2;
      const Lattice l = Lattice::from_gram(testing::random_gram(rng, b, 0.3));
      for (int k : {1, 2, 3, 5}) CHECK(std::abs(flat_torus_mesh(l, k).volume() - l.covolume()) < 1e-10);
    }
  }

  TEST_CASE("hexagonal torus triangles are equilateral") {
    const Mesh hex = flat_torus_mesh(hexagonal(), 3);
    for (double l : hex.edge_lengths()) CHECK(l == doctest::Approx(1.0 / 3.0));
  }

  TEST_CASE("boundary of boundary vanishes") {
    for (const Mesh& m : {flat_torus_mesh(hexagonal(), 3), flat_torus_mesh(critical_lattice(3), 2),
                          flat_torus_mesh(critical_lattice(3), 1)}) {
      for (int k = 2; k <= m.dim(); ++k) {
        const Eigen::SparseMatrix<int> dd = m.boundary(k - 1) * m.boundary(k);
        CHECK(Eigen::MatrixXi(dd).cwiseAbs().maxCoeff() == 0);
      }
    }
  }

  TEST_CASE("torus homology") {
    for (int k : {1, 2, 5}) check_homology(flat_torus_mesh(hexagonal(), k), 2);
    for (int k : {1, 2, 3}) check_homology(flat_torus_mesh(critical_lattice(3), k), 3);
    CHECK(flat_torus_mesh(square(), 4).euler_characteristic() == 0);
    CHECK(flat_torus_mesh(critical_lattice(3), 2).euler_characteristic() == 0);
  }

  TEST_CASE("torus homology basis follows the lattice generators") {
    const Mesh m = flat_torus_mesh(hexagonal(), 4);
    const HomologyData h = homology_basis(m);
    for (int i = 0; i < 2; ++i) {
      const Eigen::VectorXd shift = *m.edge_displacements() * h.h1_basis[i].cast<double>();
      CHECK((shift - Eigen::Vector2d::Unit(i)).norm() < 1e-12);
    }
  }

  TEST_CASE("invariant factors") {
    // Textbook example with Smith form diag(2, 6, 12).
    const std::vector<std::vector<long long>> a = {{2, 4, 4}, {-6, 6, 12}, {10, -4, -16}};
    CHECK(invariant_factors(a) == std::vector<long long>{2, 6, 12});
    CHECK(invariant_factors({{2, 0}, {0, 3}}) == std::vector<long long>{1, 6});
    CHECK(invariant_factors({{0, 0}}).empty());
  }

  TEST_CASE("conformal scaling") {
    const Mesh hex = flat_torus_mesh(hexagonal(), 4);
    const Mesh same = conformal_scale(hex, Eigen::VectorXd::Ones(hex.num_vertices()));
    CHECK(same.edge_lengths() == hex.edge_lengths());
    const Mesh big = conformal_scale(hex, Eigen::VectorXd::Constant(hex.num_vertices(), 1.7));
    CHECK(big.volume() == doctest::Approx(hex.volume() * 1.7 * 1.7).epsilon(1e-13));
    const Mesh cube = flat_torus_mesh(critical_lattice(3), 2);
    CHECK(conformal_scale(cube, Eigen::VectorXd::Constant(cube.num_vertices(), 0.5)).volume() ==
          doctest::Approx(cube.volume() / 8).epsilon(1e-13));
    CHECK_THROWS_AS(conformal_scale(hex, Eigen::VectorXd::Zero(hex.num_vertices())), Error);
  }

  TEST_CASE("volume normalization") {
    const Mesh hex = flat_torus_mesh(hexagonal(), 4);
    const Mesh unit = normalize_volume(hex);
    CHECK(std::abs(unit.volume() - 1.0) < 1e-12);
    const double factor = std::sqrt(2.0 / std::sqrt(3.0));
    CHECK(unit.edge_lengths()[0] == doctest::Approx(hex.edge_lengths()[0] * factor).epsilon(1e-13));
  }

  TEST_CASE("wedge integrals are topological") {
    for (int k : {1, 2, 4, 7}) {
      const Mesh m = flat_torus_mesh(square(), k);
      const Form dx = coordinate_form(m, 0);
      const Form dy = coordinate_form(m, 1);
      CHECK(std::abs(wedge_integral(dx, dy, m) - 1.0) < 1e-12);
      CHECK(std::abs(wedge_integral(dx, dx, m)) < 1e-12);
      const HomologyData h = homology_basis(m);
      const Form a = h.h1_cobasis[0].cast<double>();
      const Form b = h.h1_cobasis[1].cast<double>();
      CHECK(std::abs(wedge_integral(a, b, m) - 1.0) < 1e-12);
      CHECK(std::abs(wedge_integral(a, b, m) + wedge_integral(b, a, m)) < 1e-12);
    }
  }

  TEST_CASE("wedge integral ignores coboundaries and metric") {
    testing::Rng rng(4);
    const Mesh m = flat_torus_mesh(hexagonal(), 5);
    const Form dx = coordinate_form(m, 0);
    const Form dy = coordinate_form(m, 1);
    const double base = wedge_integral(dx, dy, m);
    const Form shifted = dx + vertex_gradient(m, testing::random_vector(rng, m.num_vertices()));
    CHECK(std::abs(wedge_integral(shifted, dy, m) - base) < 1e-8);
    const Mesh bumpy = conformal_scale(m, (testing::random_vector(rng, m.num_vertices(), 0.1).array() + 1).matrix());
    CHECK(std::abs(wedge_integral(dx, dy, bumpy) - base) < 1e-12);
    // Bilinearity.
    CHECK(std::abs(wedge_integral(2.0 * dx + dy, dy, m) - 2.0 * base) < 1e-12);
    Form broken = dx;
    broken(0) += 0.5;
    CHECK_THROWS_AS(wedge_integral(broken, dy, m), Error);
  }

  TEST_CASE("flat pointwise norms of coordinate forms") {
    const Mesh hex = flat_torus_mesh(hexagonal(), 4);
    // |dx^1| is the dual length of the first lattice generator: sqrt((G^{-1})_{11}).
    const double expected = std::sqrt(testing::hexagonal_gram().inverse()(0, 0));
    const Eigen::VectorXd n = pointwise_norms(hex, coordinate_form(hex, 0));
    CHECK((n.array() - expected).abs().maxCoeff() < 1e-12);
  }

  TEST_CASE("simplicial JSON round trip") {
    const Mesh m = flat_torus_mesh(hexagonal(), 3);
    REQUIRE(m.is_simplicial());
    io::Json j = io::mesh_to_json(m);
    j.erase("complex");
    const Mesh back = io::mesh_from_json(j);
    CHECK(back.num_top() == m.num_top());
    CHECK(std::abs(back.volume() - m.volume()) < 1e-12);
    CHECK(homology_basis(back).b1 == 2);
    CHECK_FALSE(flat_torus_mesh(hexagonal(), 1).is_simplicial());
    const Mesh coarse = io::mesh_from_json(io::mesh_to_json(flat_torus_mesh(critical_lattice(3), 1)));
    CHECK(homology_basis(coarse).b1 == 3);
  }

  TEST_CASE("invalid meshes") {
    std::map<std::pair<int, int>, double> lengths{{{0, 1}, 1.0}, {{1, 2}, 1.0}, {{0, 2}, 1.0}};
    try {
      Mesh::from_simplices(2, {{0, 1, 2}}, lengths);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kInvalidMesh);
    }
    const Mesh m = flat_torus_mesh(square(), 3);
    std::vector<double> bad = m.edge_lengths();
    bad[0] = 10.0;
    try {
      m.with_edge_lengths(bad);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kInvalidMetric);
    }
    CHECK_THROWS_AS(flat_torus_mesh(critical_lattice(4), 2), Error);
  }

  TEST_CASE("perturbed metric generators") {
    const Eigen::MatrixXd g = testing::hexagonal_gram();
    testing::Rng rng(17);
    const TorusMetric conf = conformal_bump_metric(g, 0.3);
    const TorusMetric stretch = stretch_bump_metric(g, 0.3);
    for (int i = 0; i < 20; ++i) {
      const Eigen::VectorXd x = testing::random_vector(rng, 2, 1.0);
      const double f = 1 + 0.3 * std::sin(2 * M_PI * x(0)) * std::sin(2 * M_PI * x(1));
      CHECK((conf(x) - f * f * g).norm() < 1e-12);
      // Stretching one frame direction by s multiplies the determinant by s^2.
      const double s1 = 1 + 0.3 * std::sin(2 * M_PI * x(1));
      CHECK(stretch(x).determinant() == doctest::Approx(s1 * s1 * g.determinant()).epsilon(1e-12));
    }
    // Not conformal: eigenvalue ratio relative to the flat metric varies.
    Eigen::Vector2d quarter(0.0, 0.25);
    const Eigen::MatrixXd rel = g.inverse() * stretch(quarter);
    const Eigen::VectorXcd ev = rel.eigenvalues();
    CHECK(std::abs(ev(0).real() - ev(1).real()) > 0.5);

    const Eigen::MatrixXd g3 = Eigen::MatrixXd::Identity(3, 3);
    const TorusMetric r1 = random_metric(g3, 0.4, 99), r2 = random_metric(g3, 0.4, 99), r3 = random_metric(g3, 0.4, 7);
    const Eigen::VectorXd x = Eigen::Vector3d(0.1, 0.7, 0.35);
    CHECK((r1(x) - r2(x)).norm() == 0.0);
    CHECK((r1(x) - r3(x)).norm() > 1e-6);
    CHECK((random_metric(g3, 0.0, 5)(x) - g3).norm() < 1e-14);
    const Eigen::VectorXd lam = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(r1(x)).eigenvalues();
    CHECK(lam.minCoeff() >= std::exp(-0.4) - 1e-12);
    CHECK(lam.maxCoeff() <= std::exp(0.4) + 1e-12);
    CHECK_THROWS_AS(conformal_bump_metric(g, 1.0), Error);
  }
}
