#include "systola/cohomology.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cochain_solvers.hpp"
#include "systola/error.hpp"

namespace systola {
namespace {

detail::CoreOptions core_options(const SolverOptions& o) {
  detail::CoreOptions c;
  c.residual_tolerance = o.residual_tolerance;
  c.accept_tolerance = o.accept_tolerance;
  c.max_newton_steps = o.max_newton_steps;
  c.initial_potential = o.initial_potential;
  return c;
}

void check_exponent(double p) {
  if (std::isinf(p) && p > 0) return;
  if (!(p > 1.0) || p > 64.0)
    fail(ErrorKind::kWrongExponent, "exponent " + std::to_string(p) + " outside (1, 64]; use p = inf for the comass");
}

void check_unit_volume(const Mesh& mesh, const SolverOptions& o) {
  if (o.require_unit_volume && std::abs(mesh.volume() - 1.0) > o.volume_tolerance)
    fail(ErrorKind::kPrecondition, "mesh volume is " + std::to_string(mesh.volume()) + ", expected 1");
}

void check_class(const CohomologyClass& cls, const Mesh& mesh) {
  if (cls.representative.size() != mesh.num_edges())
    fail(ErrorKind::kInvalidForm, "class representative has wrong number of values");
}

MinimizerResult to_result(const detail::CoreResult& r) {
  return MinimizerResult{r.form, r.value, r.residual, r.iterations};
}

MinimizerResult solve(const detail::AffineFamily& family, double p, const Mesh& mesh, const SolverOptions& options) {
  check_exponent(p);
  if (std::isinf(p)) return to_result(detail::minimize_sup(mesh, family, core_options(options)));
  check_unit_volume(mesh, options);
  if (p == 2.0 && !options.initial_potential) return to_result(detail::minimize_l2(mesh, family));
  return to_result(detail::minimize_lp(mesh, family, p, core_options(options)));
}

}  // namespace

CohomologyClass make_class(const HomologyData& homology, const Eigen::VectorXd& coefficients) {
  if (coefficients.size() != homology.b1)
    fail(ErrorKind::kInvalidInput, "class needs " + std::to_string(homology.b1) + " coefficients");
  return CohomologyClass{coefficients, homology.cobasis_matrix() * coefficients};
}

CohomologyClass class_of(const Mesh& mesh, const HomologyData& homology, const Form& closed) {
  if (closed.size() != mesh.num_edges()) fail(ErrorKind::kInvalidForm, "form has wrong number of values");
  if (!is_closed(mesh, closed)) fail(ErrorKind::kInvalidForm, "form is not closed");
  return CohomologyClass{periods(homology, closed), closed};
}

MinimizerResult lp_minimizer(const CohomologyClass& cls, double p, const Mesh& mesh, const SolverOptions& options) {
  check_class(cls, mesh);
  if (std::isinf(p)) fail(ErrorKind::kWrongExponent, "p = inf needs comass_minimizer");
  return solve(detail::AffineFamily{cls.representative, {}}, p, mesh, options);
}

MinimizerResult comass_minimizer(const CohomologyClass& cls, const Mesh& mesh, const SolverOptions& options) {
  check_class(cls, mesh);
  return solve(detail::AffineFamily{cls.representative, {}}, kInfinity, mesh, options);
}

MinimizerResult harmonic_representative(const CohomologyClass& cls, const Mesh& mesh) {
  check_class(cls, mesh);
  return to_result(detail::minimize_l2(mesh, detail::AffineFamily{cls.representative, {}}));
}

double cohomology_norm(const CohomologyClass& cls, double p, const Mesh& mesh, const SolverOptions& options) {
  check_class(cls, mesh);
  return solve(detail::AffineFamily{cls.representative, {}}, p, mesh, options).norm;
}

double homology_norm(const HomologyData& homology, const Eigen::VectorXd& h, double p, const Mesh& mesh,
                     const SolverOptions& options) {
  if (h.size() != homology.b1) fail(ErrorKind::kInvalidInput, "homology class needs " + std::to_string(homology.b1) +
                                                                    " coordinates");
  check_exponent(p);
  const double hh = h.squaredNorm();
  if (hh == 0.0) return 0.0;
  // alpha = h / |h|^2 + sum_k z_k w_k with w_k an orthonormal basis of h-perp.
  const Eigen::MatrixXd cob = homology.cobasis_matrix();
  detail::AffineFamily family;
  family.base = cob * (h / hh);
  if (homology.b1 > 1) {
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(h).householderQ();
    for (int k = 1; k < homology.b1; ++k) family.extra.push_back(cob * q.col(k));
  }
  const double m = solve(family, p, mesh, options).norm;
  if (!(m > 0)) fail(ErrorKind::kNumericalDegeneracy, "dual minimization returned a zero norm");
  return 1.0 / m;
}

Eigen::MatrixXd harmonic_gram(const Mesh& mesh, const HomologyData& homology) {
  const int b = homology.b1;
  std::vector<Form> h;
  for (int j = 0; j < b; ++j)
    h.push_back(harmonic_representative(make_class(homology, Eigen::VectorXd::Unit(b, j)), mesh).form);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(b, b);
  for (int s = 0; s < mesh.num_top(); ++s) {
    Eigen::MatrixXd x(mesh.dim(), b);
    for (int j = 0; j < b; ++j) x.col(j) = local_covector(mesh, s, h[j]);
    m += mesh.top_volume(s) * x.transpose() * x;
  }
  return 0.5 * (m + m.transpose());
}

namespace {

// Unit directions, one per +- pair.
std::vector<Eigen::VectorXd> sample_directions(int b, int samples) {
  std::vector<Eigen::VectorXd> out;
  if (b == 1) {
    out.push_back(Eigen::VectorXd::Ones(1));
  } else if (b == 2) {
    for (int j = 0; j < samples; ++j) {
      const double a = M_PI * j / samples;
      out.push_back(Eigen::Vector2d(std::cos(a), std::sin(a)));
    }
  } else if (b == 3) {
    // Fibonacci points on the upper hemisphere.
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int j = 0; j < samples; ++j) {
      const double z = 1.0 - (j + 0.5) / samples;
      const double r = std::sqrt(1.0 - z * z);
      out.push_back(Eigen::Vector3d(r * std::cos(golden * j), r * std::sin(golden * j), z));
    }
  } else {
    // Vectors with entries in {-1, 0, 1} whose first nonzero entry is +1.
    Eigen::VectorXi v = Eigen::VectorXi::Constant(b, -1);
    while (true) {
      int first = 0;
      while (first < b && v(first) == 0) ++first;
      if (first < b && v(first) == 1) out.push_back(v.cast<double>().normalized());
      int i = 0;
      while (i < b && v(i) == 1) v(i++) = -1;
      if (i == b) break;
      ++v(i);
    }
  }
  return out;
}

}  // namespace

NormBody homology_norm_body(const Mesh& mesh, const HomologyData& homology, double p, int samples,
                            const SolverOptions& options) {
  check_exponent(p);
  if (!std::isinf(p)) check_unit_volume(mesh, options);
  const int b = homology.b1;
  if (b == 0) fail(ErrorKind::kUnsupportedTopology, "first Betti number is zero");
  const Eigen::MatrixXd m = harmonic_gram(mesh, homology);
  if (p == 2.0) return NormBody::ellipsoid(m.inverse());
  if (samples < b) fail(ErrorKind::kInvalidInput, "need at least b sample directions");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const Eigen::MatrixXd inv_sqrt = es.operatorInverseSqrt();
  const std::vector<Eigen::VectorXd> dirs = sample_directions(b, samples);
  Eigen::MatrixXd normals(b, static_cast<int>(dirs.size()));
  for (std::size_t j = 0; j < dirs.size(); ++j) {
    const Eigen::VectorXd c = inv_sqrt * dirs[j];
    normals.col(static_cast<int>(j)) = c / cohomology_norm(make_class(homology, c), p, mesh, options);
  }
  return NormBody::facets(normals);
}

double norm_spread(const Mesh& mesh, const Form& form) {
  const Eigen::VectorXd n = pointwise_norms(mesh, form);
  const double mean = n.mean();
  if (mean == 0.0) return 0.0;
  return (n.maxCoeff() - n.minCoeff()) / mean;
}

double coclosed_residual(const Mesh& mesh, const Form& form) { return detail::stationarity(mesh, form, 2.0); }

bool NormProfile::constancy_ok() const {
  return std::all_of(constancy.begin(), constancy.end(), [](const ConstancyCheck& c) { return c.passed; });
}

NormProfile norm_profile(const CohomologyClass& cls, const Mesh& mesh, const std::vector<double>& ps,
                         const SolverOptions& options) {
  check_class(cls, mesh);
  NormProfile out;
  out.p_values = ps;
  std::sort(out.p_values.begin(), out.p_values.end());
  std::vector<Form> minimizers;
  for (double p : out.p_values) {
    const MinimizerResult r = std::isinf(p) ? comass_minimizer(cls, mesh, options) : lp_minimizer(cls, p, mesh, options);
    out.norms.push_back(r.norm);
    minimizers.push_back(r.form);
  }
  const double top = out.norms.empty() ? 0.0 : *std::max_element(out.norms.begin(), out.norms.end());
  for (std::size_t i = 0; i + 1 < out.norms.size(); ++i) {
    if (out.norms[i] > out.norms[i + 1] + 1e-6 * std::max(top, 1.0)) out.monotone = false;
    if (std::abs(out.norms[i + 1] - out.norms[i]) <= 1e-5 * std::max(top, 1e-300)) {
      ConstancyCheck c;
      c.p = out.p_values[i];
      c.p_next = out.p_values[i + 1];
      c.spread = norm_spread(mesh, minimizers[i + 1]);
      c.coclosed_residual = coclosed_residual(mesh, minimizers[i + 1]);
      c.passed = c.spread < 1e-3 && c.coclosed_residual < 1e-6;
      out.constancy.push_back(c);
    }
  }
  return out;
}

CupBoundReport cup_bound_check(const CohomologyClass& alpha, const CohomologyClass& beta, double p, const Mesh& mesh,
                               const SolverOptions& options) {
  if (mesh.dim() != 2) fail(ErrorKind::kUnsupportedDimension, "cup bound check is for surfaces");
  if (!(p > 1.0) || std::isinf(p)) fail(ErrorKind::kWrongExponent, "cup bound check needs 1 < p < inf");
  CupBoundReport r;
  r.p = p;
  r.q = p / (p - 1.0);
  r.norm_alpha = cohomology_norm(alpha, r.p, mesh, options);
  r.norm_beta = cohomology_norm(beta, r.q, mesh, options);
  r.lhs = r.norm_alpha * r.norm_beta;
  r.cup = wedge_integral(alpha.representative, beta.representative, mesh);
  r.constant = std::sqrt(2.0);
  r.rhs = std::abs(r.cup) / r.constant;
  r.slack = r.lhs - r.rhs;
  r.holds = r.slack >= -1e-8 * std::max(r.lhs, 1.0);
  return r;
}

}  // namespace systola
