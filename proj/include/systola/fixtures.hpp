#pragma once

#include "systola/lattice.hpp"
#include "systola/systolic.hpp"

namespace systola {

// Heisenberg nilmanifold with the submersion metric: closed geodesic circle
// fibers of length t over the flat torus R^2 / L.
struct HeisenbergFixture {
  Lattice base;
  double fiber_length = 1.0;
};

struct HeisenbergQuantities {
  double stsys1 = 0.0;  // lambda_1(L): the central class is torsion
  double pisys1 = 0.0;  // min(t, lambda_1(L))
  double vol = 0.0;     // covolume(L) t
  double deg = 0.0;     // fiber length, an upper bound for deg(AJ)
  double lhs11 = 0.0;   // stsys^2 pisys
  double rhs11 = 0.0;   // gamma_2 vol
};

HeisenbergQuantities heisenberg_quantities(const HeisenbergFixture& fx);

// Riemannian product R^b / L x F with b_1(F) = 0; the Abel-Jacobi map is the
// projection, with fibers of volume v.
struct ProductFixture {
  Lattice base;
  double fiber_volume = 1.0;
  int fiber_dim = 2;
};

struct ProductQuantities {
  int n = 0;
  int b = 0;
  double stsys1 = 0.0;
  double confsys1 = 0.0;  // lambda_1(L) / vol^{1/n}
  double vol = 0.0;
  double deg = 0.0;
  double lhs12 = 0.0;  // deg stsys^b
  double rhs12 = 0.0;  // gamma_b^{b/2} vol
  double lhs23 = 0.0;  // deg lambda_1(||.||_p)^b after scaling to unit volume
  double rhs23 = 0.0;  // gamma_b^{b/2}
};

ProductQuantities product_quantities(const ProductFixture& fx);

// (11) for Heisenberg fixtures; eq12, 23 and 23c for products.
InequalityReport verify(const HeisenbergFixture& fx, InequalityId id, const VerifyOptions& options = {});
InequalityReport verify(const ProductFixture& fx, InequalityId id, const VerifyOptions& options = {});

}  // namespace systola
