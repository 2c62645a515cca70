#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "systola/lattice.hpp"
#include "systola/mesh.hpp"

namespace testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Eigen::VectorXd random_vector(Rng& rng, int n, double scale = 1.0) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = uniform(rng, -scale, scale);
  return v;
}

inline Eigen::VectorXd random_unit(Rng& rng, int n) {
  std::normal_distribution<double> g;
  Eigen::VectorXd v(n);
  do {
    for (int i = 0; i < n; ++i) v(i) = g(rng);
  } while (v.norm() < 1e-6);
  return v.normalized();
}

// Symmetric matrix with entries in [-2, 2] whose smallest eigenvalue is at
// least min_eig (rejection sampling).
inline Eigen::MatrixXd random_gram(Rng& rng, int b, double min_eig = 0.1) {
  while (true) {
    Eigen::MatrixXd g(b, b);
    for (int i = 0; i < b; ++i)
      for (int j = i; j < b; ++j) g(i, j) = g(j, i) = uniform(rng, -2.0, 2.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    if (es.eigenvalues().minCoeff() >= min_eig) return g;
  }
}

// Random unimodular matrix as a product of elementary moves.
inline Eigen::MatrixXi random_unimodular(Rng& rng, int b, int moves = 12) {
  Eigen::MatrixXi u = Eigen::MatrixXi::Identity(b, b);
  std::uniform_int_distribution<int> idx(0, b - 1);
  std::uniform_int_distribution<int> coef(-2, 2);
  for (int m = 0; m < moves; ++m) {
    const int i = idx(rng);
    const int j = idx(rng);
    if (i == j) {
      u.col(i) *= -1;
      continue;
    }
    u.col(i) += coef(rng) * u.col(j);
  }
  return u;
}

// Symmetric polytope: m random points and their negatives (columns).
inline Eigen::MatrixXd random_symmetric_polytope(Rng& rng, int b, int m) {
  Eigen::MatrixXd v(b, 2 * m);
  for (int j = 0; j < m; ++j) {
    const Eigen::VectorXd p = random_unit(rng, b) * uniform(rng, 0.5, 1.5);
    v.col(2 * j) = p;
    v.col(2 * j + 1) = -p;
  }
  return v;
}

inline Eigen::MatrixXd regular_hexagon() {
  Eigen::MatrixXd v(2, 6);
  for (int k = 0; k < 6; ++k) {
    const double a = k * M_PI / 3.0;
    v(0, k) = std::cos(a);
    v(1, k) = std::sin(a);
  }
  return v;
}

// Exhaustive oracle: all nonzero integer vectors in [-r, r]^b of minimal
// length (within relative tolerance), and that length.
struct BruteForceMinimum {
  double length = 0.0;
  std::vector<systola::IntVector> vectors;
};

inline BruteForceMinimum brute_force_shortest(const Eigen::MatrixXd& gram, int r) {
  const int b = static_cast<int>(gram.rows());
  std::vector<systola::IntVector> all;
  std::vector<double> lens;
  systola::IntVector x = systola::IntVector::Constant(b, -r);
  while (true) {
    if (!x.isZero()) {
      const Eigen::VectorXd xd = x.cast<double>();
      all.push_back(x);
      lens.push_back(std::sqrt(xd.dot(gram * xd)));
    }
    int i = 0;
    while (i < b && x(i) == r) x(i++) = -r;
    if (i == b) break;
    ++x(i);
  }
  BruteForceMinimum out;
  out.length = *std::min_element(lens.begin(), lens.end());
  for (std::size_t k = 0; k < all.size(); ++k)
    if (lens[k] <= out.length * (1 + 1e-9)) out.vectors.push_back(all[k]);
  return out;
}

inline Eigen::MatrixXd hexagonal_gram() {
  Eigen::MatrixXd g(2, 2);
  g << 1.0, 0.5, 0.5, 1.0;
  return g;
}

inline Eigen::MatrixXd d4_gram() {
  Eigen::MatrixXd g(4, 4);
  g << 2, -1, 0, 0, -1, 2, -1, -1, 0, -1, 2, 0, 0, -1, 0, 2;
  return g;
}

// Conformal bump exp(a cos(2 pi x_0) cos(2 pi x_1)) times a constant Gram.
inline systola::TorusMetric bump_metric(const Eigen::MatrixXd& gram, double a) {
  return [gram, a](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    const double c = std::cos(2 * M_PI * x(0)) * std::cos(2 * M_PI * x(1));
    return std::exp(a * c) * gram;
  };
}

// Unit-volume torus mesh with the bump metric.
inline systola::Mesh bump_torus(int k, double a, int b = 2) {
  const Eigen::MatrixXd g = Eigen::MatrixXd::Identity(b, b);
  return systola::normalize_volume(systola::torus_mesh(systola::Lattice::from_gram(g), k, bump_metric(g, a)));
}

inline Eigen::VectorXd random_potential(Rng& rng, int nv, double scale = 1.0) {
  return random_vector(rng, nv, scale);
}

}  // namespace testing
