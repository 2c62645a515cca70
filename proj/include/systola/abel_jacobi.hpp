#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "systola/cohomology.hpp"
#include "systola/mesh.hpp"
#include "systola/normed_space.hpp"

namespace systola {

// Piecewise-linear map from a mesh to the torus R^b / Z^b, stored through its
// lift: every edge carries the increment of the lift along it. The target
// carries the Euclidean structure `target_gram` (in lattice coordinates).
struct PLTorusMap {
  Mesh mesh;
  Eigen::MatrixXd target_gram;     // b x b
  Eigen::MatrixXd increments;      // b x E
  Eigen::MatrixXd vertex_values;   // b x V, lift integrated along a spanning tree from vertex 0
  Eigen::MatrixXi edge_shifts;     // b x E, value(head) - value(tail) - increment (lattice vectors)
  Eigen::MatrixXd period_matrix;   // b x b1, induced map on H_1 in the mesh homology basis

  int target_dim() const { return static_cast<int>(target_gram.rows()); }
  // Differential on top simplex s in its orthonormal frame (b x n, lattice coordinates).
  Eigen::MatrixXd differential(int s) const;
  // Lifted images of the vertices of simplex s, consistent within the simplex (b x (n+1)).
  Eigen::MatrixXd simplex_image(int s) const;
};

// Builds the lift from edge increments; throws invalid-form when the
// increments are not equivariant (periods not integral up to 1e-6).
PLTorusMap make_torus_map(const Mesh& mesh, const HomologyData& homology, const Eigen::MatrixXd& increments,
                          const Eigen::MatrixXd& target_gram);

// Closed forms with invertible period matrix P (P_ij = <omega_i, h_j>); the
// forms are recombined by P^{-1} so that the induced map on H_1 is the identity.
PLTorusMap abel_jacobi_map(const Mesh& mesh, const HomologyData& homology, const std::vector<Form>& forms,
                           const std::optional<Eigen::MatrixXd>& target_gram = std::nullopt);

// Abel-Jacobi map from the harmonic representatives, into the torus with the
// flat metric dual to the harmonic L^2 Gram matrix.
PLTorusMap harmonic_abel_jacobi_map(const Mesh& mesh, const HomologyData& homology);

// x -> A x on a torus mesh (needs edge displacements). A is an integer matrix.
PLTorusMap linear_torus_map(const Mesh& mesh, const HomologyData& homology, const Eigen::MatrixXd& a,
                            const Eigen::MatrixXd& target_gram);

// f = L^{-1} o Pr o F with F = (sqrt(lambda_i) f_i), df_i = omega_i. Each
// omega_i must lie in the class of L_i with |omega_i|_p = 1 within 1e-6. The
// target Euclidean structure is sum_i lambda_i L_i L_i'.
PLTorusMap bi_map(const Mesh& mesh, const HomologyData& homology, const Rank1Decomposition& decomp,
                  const std::vector<Form>& minimizers, double p);

// The whole construction: norm body of ||.||_p, John ellipsoid, rank-1
// decomposition, L^p minimizers, map.
struct BIConstruction {
  double p = 0.0;
  NormBody body = NormBody::ellipsoid(Eigen::MatrixXd::Identity(1, 1));
  JohnResult john;
  Rank1Decomposition decomposition;
  std::vector<Form> minimizers;
  std::vector<double> minimizer_norms;
  std::vector<double> minimizer_spreads;
  PLTorusMap map;
};

struct BIOptions {
  int samples = 24;  // sampled functionals for p != 2
  SolverOptions solver;
};

BIConstruction bi_construction(const Mesh& mesh, const HomologyData& homology, double p,
                               const BIOptions& options = {});

enum class JacobianMode { kFull, kPerp };

struct JacobianField {
  Eigen::VectorXd values;  // per top simplex, >= 0
  Eigen::VectorXd signs;   // orientation of the differential (n = b), 0 when degenerate
  double integral = 0.0;
};

JacobianField jacobian_field(const PLTorusMap& map, JacobianMode mode = JacobianMode::kPerp);

// Largest ratio of singular values of the differential, measured in the target
// Euclidean structure, over top simplices with nonzero Jacobian.
double conformality_defect(const PLTorusMap& map);

struct ChainStep {
  std::string name;
  double min_slack = 0.0;  // pointwise steps: min over simplices of rhs - lhs
  double lhs = 0.0;        // integrated sides
  double rhs = 0.0;
};

struct JensenChainReport {
  double p = 0.0;
  std::vector<ChainStep> steps;
  double integral_jacobian = 0.0;
  bool holds = false;  // every step has slack >= -tolerance
  double tolerance = 1e-10;
};

// Evaluates the chain jac_perp f <= jac(dF|Sigma) <= (tr/b)^{b/2}
// <= (sum lambda_i/b |omega_i|^2)^{b/2} <= (sum lambda_i/b |omega_i|^p)^{b/p}
// pointwise, then the integrated Hoelder and normalization steps.
JensenChainReport jensen_chain_check(const BIConstruction& bi, double tolerance = 1e-10);
JensenChainReport jensen_chain_check(const Mesh& mesh, const HomologyData& homology, double p,
                                     const BIOptions& options = {});

struct WedgeBoundReport {
  double wedge_integral = 0.0;  // int |omega_1 ^ omega_2|
  double energy_bound = 0.0;    // (1/2) int |omega_1|^2 + |omega_2|^2
  double slack = 0.0;
  bool holds = false;
};

// Surfaces with b_1 = 2: an L^2-orthonormal harmonic basis.
WedgeBoundReport lichnerowicz_check(const Mesh& mesh, const HomologyData& homology);

struct CoareaReport {
  double jacobian_integral = 0.0;
  double preimage_estimate = 0.0;  // mean preimage count times target volume
  double relative_error = 0.0;
  int samples = 0;
  int rejected = 0;  // non-regular samples replaced by later points
};

// n = b only. Regular values come from a shifted Halton sequence.
CoareaReport coarea_check(const PLTorusMap& map, int samples = 10000);

struct DegreeReport {
  int signed_degree = 0;
  int degree = 0;  // absolute value
  int regular_values = 0;
};

// Signed preimage count, required to agree at every tested regular value.
DegreeReport degree(const PLTorusMap& map, int regular_values = 16);

}  // namespace systola
