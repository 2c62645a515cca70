#pragma once

#include <Eigen/Dense>
#include <limits>
#include <optional>
#include <vector>

#include "systola/mesh.hpp"
#include "systola/normed_space.hpp"

namespace systola {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// A real class in H^1, stored by its coefficients in the integral cobasis of a
// HomologyData together with one closed cochain representing it.
struct CohomologyClass {
  Eigen::VectorXd coefficients;
  Form representative;
};

CohomologyClass make_class(const HomologyData& homology, const Eigen::VectorXd& coefficients);
// Class of a closed cochain; throws invalid-form when it is not closed.
CohomologyClass class_of(const Mesh& mesh, const HomologyData& homology, const Form& closed);

struct SolverOptions {
  double residual_tolerance = 1e-10;
  double accept_tolerance = 1e-8;
  int max_newton_steps = 400;
  // Finite-p norms are only comparable across p on unit-volume meshes.
  bool require_unit_volume = true;
  double volume_tolerance = 1e-9;
  std::optional<Eigen::VectorXd> initial_potential;
};

struct MinimizerResult {
  Form form;
  double norm = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

// 1 < p <= 64.
MinimizerResult lp_minimizer(const CohomologyClass& cls, double p, const Mesh& mesh, const SolverOptions& options = {});
// min over representatives of the largest pointwise norm.
MinimizerResult comass_minimizer(const CohomologyClass& cls, const Mesh& mesh, const SolverOptions& options = {});
MinimizerResult harmonic_representative(const CohomologyClass& cls, const Mesh& mesh);

// |alpha|*_p; p may be kInfinity.
double cohomology_norm(const CohomologyClass& cls, double p, const Mesh& mesh, const SolverOptions& options = {});

// Dual norm on H_1: max <alpha, h> over |alpha|*_p <= 1, with h in the basis of
// `homology`. Solved as 1 / min |alpha|*_p over the hyperplane <alpha, h> = 1.
double homology_norm(const HomologyData& homology, const Eigen::VectorXd& h, double p, const Mesh& mesh,
                     const SolverOptions& options = {});

// L^2 Gram matrix of the harmonic representatives of the cobasis classes,
// so that |alpha|*_2 = sqrt(alpha' M alpha).
Eigen::MatrixXd harmonic_gram(const Mesh& mesh, const HomologyData& homology);

// Unit ball of ||.||_p on H_1 in basis coordinates. For p = 2 it is the exact
// ellipsoid. Otherwise it is cut out by the functionals alpha_j / |alpha_j|*_p
// for `samples` directions alpha_j spread evenly in the harmonic metric; this
// body contains the true ball and touches it along every sampled functional.
NormBody homology_norm_body(const Mesh& mesh, const HomologyData& homology, double p, int samples = 24,
                            const SolverOptions& options = {});

// (max - min) / mean of the pointwise norms.
double norm_spread(const Mesh& mesh, const Form& form);
// Relative size of d* of the form in the discrete L^2 inner product.
double coclosed_residual(const Mesh& mesh, const Form& form);

struct ConstancyCheck {
  double p = 0.0;
  double p_next = 0.0;
  double spread = 0.0;
  double coclosed_residual = 0.0;
  bool passed = false;
};

struct NormProfile {
  std::vector<double> p_values;
  std::vector<double> norms;
  bool monotone = true;
  // One entry for every consecutive pair whose norms agree to 1e-5.
  std::vector<ConstancyCheck> constancy;
  bool constancy_ok() const;
};

NormProfile norm_profile(const CohomologyClass& cls, const Mesh& mesh, const std::vector<double>& ps,
                         const SolverOptions& options = {});

struct CupBoundReport {
  double p = 0.0;
  double q = 0.0;
  double norm_alpha = 0.0;
  double norm_beta = 0.0;
  double lhs = 0.0;  // |alpha|*_p |beta|*_q
  double cup = 0.0;  // (alpha cup beta)[X]
  double constant = 0.0;
  double rhs = 0.0;  // |cup| / constant
  double slack = 0.0;
  bool holds = false;
};

// Surfaces only; q is the conjugate exponent of p.
CupBoundReport cup_bound_check(const CohomologyClass& alpha, const CohomologyClass& beta, double p, const Mesh& mesh,
                               const SolverOptions& options = {});

}  // namespace systola
