#include <doctest.h>

#include <cmath>
#include <set>

#include "support.hpp"
#include "systola/error.hpp"
#include "systola/lattice.hpp"

using namespace systola;

namespace {

std::set<std::vector<long long>> as_set(const std::vector<IntVector>& vs) {
  std::set<std::vector<long long>> s;
  for (const auto& v : vs) s.insert(std::vector<long long>(v.data(), v.data() + v.size()));
  return s;
}

void check_against_brute_force(const Eigen::MatrixXd& gram, int range) {
  const auto mv = shortest_vectors(Lattice::from_gram(gram));
  const auto oracle = testing::brute_force_shortest(gram, range);
  CHECK(mv.length == doctest::Approx(oracle.length).epsilon(1e-12));
  CHECK(as_set(mv.vectors) == as_set(oracle.vectors));
}

}  // namespace

TEST_SUITE("lattice") {
  TEST_CASE("identity lattice has four minimal vectors") {
    const auto mv = shortest_vectors(Lattice::from_gram(Eigen::MatrixXd::Identity(2, 2)));
    CHECK(mv.length == doctest::Approx(1.0));
    CHECK(mv.vectors.size() == 4);
  }

  TEST_CASE("hexagonal and D4 minimal vectors match exhaustive search") {
    check_against_brute_force(testing::hexagonal_gram(), 3);
    check_against_brute_force(testing::d4_gram(), 3);
    CHECK(shortest_vectors(Lattice::from_gram(testing::hexagonal_gram())).vectors.size() == 6);
    const auto d4 = shortest_vectors(Lattice::from_gram(testing::d4_gram()));
    CHECK(d4.vectors.size() == 24);
    CHECK(d4.length == doctest::Approx(std::sqrt(2.0)));
  }

  TEST_CASE("minimal vector sets are symmetric") {
    testing::Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
      const auto mv = shortest_vectors(Lattice::from_gram(testing::random_gram(rng, 3)));
      const auto s = as_set(mv.vectors);
      for (const auto& v : mv.vectors) {
        const IntVector neg = -v;
        CHECK(s.count(std::vector<long long>(neg.data(), neg.data() + neg.size())) == 1);
      }
    }
  }

  TEST_CASE("hermite ratios of the catalog lattices") {
    CHECK(hermite_ratio(Lattice::from_gram(Eigen::MatrixXd::Identity(2, 2))) == doctest::Approx(1.0));
    // Oracle: exhaustive lambda_1 over the determinant.
    for (const auto& g : {testing::hexagonal_gram(), testing::d4_gram()}) {
      const auto oracle = testing::brute_force_shortest(g, 3);
      const double expected = std::pow(oracle.length, g.rows()) / std::sqrt(g.determinant());
      CHECK(std::abs(hermite_ratio(Lattice::from_gram(g)) - expected) < 1e-10);
    }
    CHECK(std::abs(hermite_ratio(Lattice::from_gram(testing::hexagonal_gram())) - 2.0 / std::sqrt(3.0)) < 1e-10);
    CHECK(std::abs(hermite_ratio(Lattice::from_gram(testing::d4_gram())) - 2.0) < 1e-10);
  }

  TEST_CASE("perfection and eutaxy") {
    const Lattice z2 = Lattice::from_gram(Eigen::MatrixXd::Identity(2, 2));
    const Lattice a2 = Lattice::from_gram(testing::hexagonal_gram());
    const Lattice d4 = Lattice::from_gram(testing::d4_gram());
    CHECK_FALSE(is_perfect(z2));
    CHECK(is_eutactic(z2));
    CHECK(is_perfect(a2));
    CHECK(is_eutactic(a2));
    CHECK(is_perfect(d4));
    CHECK(is_eutactic(d4));
    for (int b = 2; b <= 4; ++b) CHECK_FALSE(is_perfect(Lattice::from_gram(Eigen::MatrixXd::Identity(b, b))));
  }

  TEST_CASE("a non-eutactic lattice is rejected") {
    // Only +-e1 is minimal, and one rank-1 form cannot reach the inverse Gram.
    Eigen::MatrixXd g(2, 2);
    g << 1.0, -0.45, -0.45, 1.4;
    const Lattice l = Lattice::from_gram(g);
    CHECK(eutaxy(l).verdict == Eutaxy::kNotEutactic);
  }

  TEST_CASE("critical lattice catalog") {
    for (int b = 1; b <= 4; ++b) {
      const Lattice l = critical_lattice(b);
      CHECK(is_perfect(l));
      CHECK(is_eutactic(l));
      CHECK(std::abs(hermite_ratio(l) - hermite_catalog_constant(b)) < 1e-10);
    }
    CHECK_THROWS_AS(critical_lattice(5), Error);
    CHECK_THROWS_AS(hermite_catalog_constant(0), Error);
  }

  TEST_CASE("input validation") {
    try {
      Lattice::from_gram(Eigen::MatrixXd::Identity(9, 9));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kUnsupportedDimension);
    }
    Eigen::MatrixXd bad(2, 2);
    bad << 1, 2, 2, 1;
    try {
      Lattice::from_gram(bad);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kInvalidLattice);
    }
  }

  TEST_CASE("basis is the lower-triangular Cholesky factor") {
    testing::Rng rng(3);
    const Eigen::MatrixXd g = testing::random_gram(rng, 3);
    const Lattice l = Lattice::from_gram(g);
    CHECK((l.basis().transpose() * l.basis() - g).norm() < 1e-12);
    CHECK(l.basis().triangularView<Eigen::StrictlyUpper>().toDenseMatrix().norm() == 0.0);
    CHECK((l.basis().diagonal().array() > 0).all());
    CHECK(l.covolume() == doctest::Approx(std::sqrt(g.determinant())).epsilon(1e-12));
  }

  TEST_CASE("property: shortest vectors agree with brute force on random lattices") {
    testing::Rng rng(2024);
    for (int trial = 0; trial < 60; ++trial) {
      const int b = 1 + trial % 3;
      check_against_brute_force(testing::random_gram(rng, b), 5);
    }
  }

  TEST_CASE("property: hermite ratio is scale and basis invariant") {
    testing::Rng rng(11);
    for (int trial = 0; trial < 30; ++trial) {
      const int b = 2 + trial % 3;
      const Lattice l = Lattice::from_gram(testing::random_gram(rng, b));
      const double r = hermite_ratio(l);
      CHECK(std::abs(hermite_ratio(l.scaled(testing::uniform(rng, 0.1, 10.0))) - r) < 1e-10 * r);
      CHECK(std::abs(hermite_ratio(l.change_basis(testing::random_unimodular(rng, b))) - r) < 1e-9 * r);
    }
  }

  TEST_CASE("property: no random lattice beats the critical one") {
    testing::Rng rng(99);
    for (int trial = 0; trial < 90; ++trial) {
      const int b = 2 + trial % 3;
      const Lattice l = Lattice::from_gram(testing::random_gram(rng, b));
      CHECK(hermite_ratio(l) <= hermite_catalog_constant(b) + 1e-9);
    }
  }
}
