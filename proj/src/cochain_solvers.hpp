#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "systola/mesh.hpp"

namespace systola::detail {

// omega(f, z) = base + d f + sum_k z_k extra_k, with f(vertex 0) = 0.
struct AffineFamily {
  Form base;
  std::vector<Form> extra;
};

struct CoreOptions {
  double residual_tolerance = 1e-10;
  double accept_tolerance = 1e-8;  // convergence error above this
  int max_newton_steps = 400;
  std::optional<Eigen::VectorXd> initial_potential;  // skips the warm start when set
};

struct CoreResult {
  Form form;
  Eigen::VectorXd potential;  // per vertex
  Eigen::VectorXd extra;      // z
  double value = 0.0;         // L^p norm, or max pointwise norm for p = infinity
  double residual = 0.0;
  int iterations = 0;
};

// (sum_s vol_s |omega|_s^p)^{1/p}, or max_s |omega|_s for p = infinity.
double lp_norm(const Mesh& mesh, const Form& form, double p);

// Gradient norm of f -> N_p(form + d f) at f = 0, scaled so that it is
// invariant under form -> c form. Zero exactly at L^p minimizers.
double stationarity(const Mesh& mesh, const Form& form, double p);

CoreResult minimize_l2(const Mesh& mesh, const AffineFamily& family);
CoreResult minimize_lp(const Mesh& mesh, const AffineFamily& family, double p, const CoreOptions& options);
CoreResult minimize_sup(const Mesh& mesh, const AffineFamily& family, const CoreOptions& options);

}  // namespace systola::detail
