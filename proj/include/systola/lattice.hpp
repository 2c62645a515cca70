#pragma once

#include <Eigen/Dense>
#include <vector>

namespace systola {

using IntVector = Eigen::Matrix<long long, Eigen::Dynamic, 1>;

inline constexpr int kMaxLatticeDim = 8;

// Full-rank Euclidean lattice. The Gram matrix is the ground truth; the basis
// is the lower-triangular factor B with B'B = gram (columns are generators).
class Lattice {
 public:
  static Lattice from_gram(const Eigen::MatrixXd& gram);
  static Lattice from_basis(const Eigen::MatrixXd& basis);

  int dim() const { return static_cast<int>(gram_.rows()); }
  const Eigen::MatrixXd& gram() const { return gram_; }
  const Eigen::MatrixXd& basis() const { return basis_; }
  double covolume() const { return covolume_; }

  // Euclidean length of the lattice vector with integer coordinates v.
  double length(const IntVector& v) const;
  double length(const Eigen::VectorXd& v) const;

  Lattice scaled(double c) const;
  // Same lattice in the basis basis*u for a unimodular integer matrix u.
  Lattice change_basis(const Eigen::MatrixXi& unimodular) const;

 private:
  Lattice(Eigen::MatrixXd gram, Eigen::MatrixXd basis, double covolume)
      : gram_(std::move(gram)), basis_(std::move(basis)), covolume_(covolume) {}

  Eigen::MatrixXd gram_;
  Eigen::MatrixXd basis_;
  double covolume_;
};

struct MinimalVectorSet {
  std::vector<IntVector> vectors;  // closed under negation
  double length = 0.0;             // lambda_1
};

// All nonzero v with v'Gv <= radius^2, by Fincke-Pohst enumeration.
// Throws a resource error past max_count vectors.
std::vector<IntVector> enumerate_short_vectors(const Eigen::MatrixXd& gram, double radius,
                                               std::size_t max_count = 2'000'000);

// lambda_1 and every vector within lambda_1 * (1 + relative_tolerance).
MinimalVectorSet shortest_vectors(const Lattice& lattice, double relative_tolerance = 1e-9);

// lambda_1^b / covolume.
double hermite_ratio(const Lattice& lattice);

bool is_perfect(const Lattice& lattice, double relative_tolerance = 1e-9);

enum class Eutaxy { kEutactic, kNotEutactic, kIndeterminate };
const char* to_string(Eutaxy e);

struct EutaxyResult {
  Eutaxy verdict = Eutaxy::kIndeterminate;
  double margin = 0.0;  // best achievable min coefficient (after scaling lambda_1 to 1)
};

// Decides whether the identity is a strictly positive combination of the
// rank-1 forms vv' over minimal vectors, with positivity margin `margin_tolerance`.
EutaxyResult eutaxy(const Lattice& lattice, double margin_tolerance = 1e-8,
                    double relative_tolerance = 1e-9);
bool is_eutactic(const Lattice& lattice);

// gamma_b^{b/2}, the maximal Hermite ratio in dimension b (1 <= b <= 4).
double hermite_catalog_constant(int b);

// Z, A2, A3 (fcc), D4 for b = 1..4.
Lattice critical_lattice(int b);

}  // namespace systola
