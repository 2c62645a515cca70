#include "cochain_solvers.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "systola/error.hpp"

namespace systola::detail {
namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

struct Local {
  std::vector<int> vars;  // vertex variables (n+1), then extra variables (m)
  Eigen::MatrixXd jac;    // n x (n+1+m)
  Eigen::VectorXd x0;
  double vol = 0.0;
};

class Problem {
 public:
  Problem(const Mesh& mesh, const AffineFamily& family, double base_scale)
      : mesh_(mesh), family_(family), base_scale_(base_scale) {
    const int n = mesh.dim();
    const int m = static_cast<int>(family.extra.size());
    num_vertex_vars_ = mesh.num_vertices() - 1;
    num_vars_ = num_vertex_vars_ + m;
    locals_.resize(mesh.num_top());
    for (int s = 0; s < mesh.num_top(); ++s) {
      const TopSimplex& t = mesh.top(s);
      const Eigen::MatrixXd& frame = mesh.top_frame(s);
      Local& loc = locals_[s];
      loc.vol = mesh.top_volume(s);
      for (int v : t.vertices) loc.vars.push_back(v == 0 ? -1 : v - 1);
      for (int k = 0; k < m; ++k) loc.vars.push_back(num_vertex_vars_ + k);
      Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(n, n + 1 + m);
      Eigen::VectorXd c0(n);
      for (int i = 0; i < n; ++i) {
        // Local pair (0, i+1) sits in slot i.
        raw(i, 0) = -1.0;
        raw(i, i + 1) = 1.0;
        const int e = t.edges[i];
        const double sg = t.signs[i];
        c0(i) = sg * family.base(e) / base_scale;
        for (int k = 0; k < m; ++k) raw(i, n + 1 + k) = sg * family.extra[k](e);
      }
      const auto lower = frame.triangularView<Eigen::Lower>();
      loc.jac = lower.solve(raw);
      loc.x0 = lower.solve(c0);
    }
  }

  int num_vars() const { return num_vars_; }
  int num_top() const { return static_cast<int>(locals_.size()); }
  const Local& local(int s) const { return locals_[s]; }

  Eigen::VectorXd gather(const Local& loc, const Eigen::VectorXd& y) const {
    Eigen::VectorXd out(loc.vars.size());
    for (std::size_t i = 0; i < loc.vars.size(); ++i) out(i) = loc.vars[i] < 0 ? 0.0 : y(loc.vars[i]);
    return out;
  }

  Eigen::VectorXd covector(int s, const Eigen::VectorXd& y) const {
    const Local& loc = locals_[s];
    return loc.x0 + loc.jac * gather(loc, y);
  }

  // Adds J' w to g and J' W J to the triplets (over the first num_vars entries).
  void scatter(const Local& loc, const Eigen::VectorXd& w, const Eigen::MatrixXd& hw, Eigen::VectorXd& g,
               Triplets* trips) const {
    const Eigen::VectorXd lg = loc.jac.transpose() * w;
    for (std::size_t i = 0; i < loc.vars.size(); ++i)
      if (loc.vars[i] >= 0) g(loc.vars[i]) += lg(i);
    if (!trips) return;
    const Eigen::MatrixXd lh = loc.jac.transpose() * hw * loc.jac;
    for (std::size_t i = 0; i < loc.vars.size(); ++i) {
      if (loc.vars[i] < 0) continue;
      for (std::size_t j = 0; j < loc.vars.size(); ++j)
        if (loc.vars[j] >= 0) trips->emplace_back(loc.vars[i], loc.vars[j], lh(i, j));
    }
  }

  // Form and potentials in the original (unscaled) units.
  CoreResult result(const Eigen::VectorXd& y) const {
    CoreResult r;
    const int nv = mesh_.num_vertices();
    r.potential = Eigen::VectorXd::Zero(nv);
    for (int v = 1; v < nv; ++v) r.potential(v) = base_scale_ * y(v - 1);
    const int m = static_cast<int>(family_.extra.size());
    r.extra = Eigen::VectorXd(m);
    for (int k = 0; k < m; ++k) r.extra(k) = base_scale_ * y(num_vertex_vars_ + k);
    r.form = family_.base + vertex_gradient(mesh_, r.potential);
    for (int k = 0; k < m; ++k) r.form += r.extra(k) * family_.extra[k];
    return r;
  }

 private:
  const Mesh& mesh_;
  const AffineFamily& family_;
  double base_scale_;
  int num_vertex_vars_ = 0;
  int num_vars_ = 0;
  std::vector<Local> locals_;
};

class SpdSolver {
 public:
  Eigen::VectorXd solve(int n, const Triplets& trips, const Eigen::VectorXd& rhs) {
    Eigen::SparseMatrix<double> h(n, n);
    h.setFromTriplets(trips.begin(), trips.end());
    if (!analyzed_) {
      ldlt_.analyzePattern(h);
      analyzed_ = true;
    }
    ldlt_.factorize(h);
    if (ldlt_.info() == Eigen::Success) {
      Eigen::VectorXd x = ldlt_.solve(rhs);
      if (x.allFinite()) return x;
    }
    // Tiny diagonal shift for numerically singular Hessians.
    double trace = 0.0;
    for (int i = 0; i < n; ++i) trace += h.coeff(i, i);
    const double shift = 1e-12 * std::max(trace / std::max(n, 1), 1e-300);
    Eigen::SparseMatrix<double> eye(n, n);
    eye.setIdentity();
    h += shift * eye;
    ldlt_.factorize(h);
    if (ldlt_.info() != Eigen::Success) fail(ErrorKind::kNumericalDegeneracy, "singular Newton system");
    return ldlt_.solve(rhs);
  }

 private:
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  bool analyzed_ = false;
};

struct LpEval {
  double energy = 0.0;
  Eigen::VectorXd grad;
};

// Regularized energy sum vol (|x|^2 + eps^2)^{p/2}, optionally with Hessian.
LpEval eval_lp(const Problem& pr, const Eigen::VectorXd& y, double p, double eps2, Triplets* trips) {
  LpEval out;
  out.grad = Eigen::VectorXd::Zero(pr.num_vars());
  if (trips) trips->clear();
  for (int s = 0; s < pr.num_top(); ++s) {
    const Local& loc = pr.local(s);
    const Eigen::VectorXd x = loc.x0 + loc.jac * pr.gather(loc, y);
    const double t = x.squaredNorm() + eps2;
    out.energy += loc.vol * std::pow(t, 0.5 * p);
    if (t == 0.0) {
      // Only p = 2 has a nonzero second derivative at the origin.
      const Eigen::MatrixXd hw = Eigen::MatrixXd::Identity(x.size(), x.size()) * (p == 2.0 ? 2.0 * loc.vol : 0.0);
      if (trips) pr.scatter(loc, Eigen::VectorXd::Zero(x.size()), hw, out.grad, trips);
      continue;
    }
    const double d1 = 0.5 * p * std::pow(t, 0.5 * p - 1.0);
    const Eigen::VectorXd w = loc.vol * 2.0 * d1 * x;
    if (trips) {
      const double d2 = 0.5 * p * (0.5 * p - 1.0) * std::pow(t, 0.5 * p - 2.0);
      Eigen::MatrixXd hw = 2.0 * d1 * Eigen::MatrixXd::Identity(x.size(), x.size()) + 4.0 * d2 * x * x.transpose();
      pr.scatter(loc, w, loc.vol * hw, out.grad, trips);
    } else {
      pr.scatter(loc, w, Eigen::MatrixXd(), out.grad, nullptr);
    }
  }
  return out;
}

double lp_energy(const Problem& pr, const Eigen::VectorXd& y, double p, double eps2) {
  double e = 0.0;
  for (int s = 0; s < pr.num_top(); ++s) {
    const Local& loc = pr.local(s);
    e += loc.vol * std::pow((loc.x0 + loc.jac * pr.gather(loc, y)).squaredNorm() + eps2, 0.5 * p);
  }
  return e;
}

// Gradient of the L^p norm itself with respect to the variables.
double lp_residual(const Problem& pr, const Eigen::VectorXd& y, double p) {
  const LpEval ev = eval_lp(pr, y, p, 0.0, nullptr);
  if (ev.energy <= 0) return 0.0;
  return ev.grad.norm() / (p * std::pow(ev.energy, (p - 1.0) / p));
}

// Damped Newton on the regularized energy. Returns the step count.
int newton_lp(const Problem& pr, Eigen::VectorXd& y, double p, double eps2, double target, int max_steps,
              bool check_residual) {
  SpdSolver solver;
  Triplets trips;
  int steps = 0;
  for (; steps < max_steps; ++steps) {
    const LpEval ev = eval_lp(pr, y, p, eps2, &trips);
    if (check_residual && lp_residual(pr, y, p) < target) break;
    const Eigen::VectorXd dir = solver.solve(pr.num_vars(), trips, -ev.grad);
    const double decrement = -ev.grad.dot(dir);
    if (!check_residual && decrement <= target * ev.energy) break;
    if (!(decrement > 0)) break;
    if (decrement <= 1e-12 * ev.energy) {
      // The energy cannot resolve the decrease any more; judge the full step
      // by the gradient instead.
      const Eigen::VectorXd trial = y + dir;
      if (eval_lp(pr, trial, p, eps2, nullptr).grad.norm() >= ev.grad.norm()) break;
      y = trial;
      continue;
    }
    double alpha = 1.0;
    bool moved = false;
    while (alpha > 1e-14) {
      const Eigen::VectorXd trial = y + alpha * dir;
      const double e = lp_energy(pr, trial, p, eps2);
      if (std::isfinite(e) && e <= ev.energy - 0.25 * alpha * decrement) {
        y = trial;
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) {
      y += dir;
      if (lp_energy(pr, y, p, eps2) > ev.energy * (1 + 1e-12)) {
        y -= dir;
        break;
      }
    }
  }
  return steps;
}

Eigen::VectorXd harmonic_vars(const Problem& pr) {
  if (pr.num_vars() == 0) return Eigen::VectorXd();
  Eigen::VectorXd y = Eigen::VectorXd::Zero(pr.num_vars());
  SpdSolver solver;
  Triplets trips;
  // The energy is quadratic: one Newton step, plus one refinement step.
  for (int it = 0; it < 2; ++it) {
    const LpEval ev = eval_lp(pr, y, 2.0, 0.0, &trips);
    y += solver.solve(pr.num_vars(), trips, -ev.grad);
  }
  return y;
}

double max_pointwise(const Problem& pr, const Eigen::VectorXd& y) {
  double m = 0.0;
  for (int s = 0; s < pr.num_top(); ++s) m = std::max(m, pr.covector(s, y).norm());
  return m;
}

bool is_trivial(const AffineFamily& family) {
  if (!family.extra.empty()) return false;
  return family.base.cwiseAbs().maxCoeff() == 0.0;
}

// Size of the harmonic solution, used to rescale into |x| ~ 1 units. Zero
// when the family contains an exact form up to rounding.
double family_scale(const Mesh& mesh, const AffineFamily& family) {
  const Problem unit(mesh, family, 1.0);
  const Eigen::VectorXd y = harmonic_vars(unit);
  const double s = max_pointwise(unit, y);
  const double ref = max_pointwise(unit, Eigen::VectorXd::Zero(unit.num_vars()));
  return s <= 1e-12 * ref ? 0.0 : s;
}

CoreResult zero_result(const Mesh& mesh, const AffineFamily& family) {
  const Problem pr(mesh, family, 1.0);
  CoreResult r = pr.result(Eigen::VectorXd::Zero(pr.num_vars()));
  r.form.setZero();
  r.potential.setZero();
  return r;
}

std::string format_residual(double r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", r);
  return buf;
}

}  // namespace

double lp_norm(const Mesh& mesh, const Form& form, double p) {
  const Eigen::VectorXd n = pointwise_norms(mesh, form);
  if (std::isinf(p)) return n.size() ? n.maxCoeff() : 0.0;
  double e = 0.0;
  for (int s = 0; s < mesh.num_top(); ++s) e += mesh.top_volume(s) * std::pow(n(s), p);
  return std::pow(e, 1.0 / p);
}

double stationarity(const Mesh& mesh, const Form& form, double p) {
  const double scale = form.size() ? form.cwiseAbs().maxCoeff() : 0.0;
  if (scale == 0.0 || mesh.num_vertices() < 2) return 0.0;
  const AffineFamily family{form, {}};
  const Problem pr(mesh, family, scale);
  return lp_residual(pr, Eigen::VectorXd::Zero(pr.num_vars()), p);
}

CoreResult minimize_l2(const Mesh& mesh, const AffineFamily& family) {
  if (is_trivial(family)) return zero_result(mesh, family);
  const Problem pr(mesh, family, 1.0);
  const Eigen::VectorXd y = pr.num_vars() ? harmonic_vars(pr) : Eigen::VectorXd();
  CoreResult r = pr.result(y);
  r.value = lp_norm(mesh, r.form, 2.0);
  r.residual = pr.num_vars() ? lp_residual(pr, y, 2.0) : 0.0;
  r.iterations = 1;
  return r;
}

CoreResult minimize_lp(const Mesh& mesh, const AffineFamily& family, double p, const CoreOptions& options) {
  if (is_trivial(family)) return zero_result(mesh, family);
  const double scale = family_scale(mesh, family);
  if (scale == 0.0) {
    CoreResult r = minimize_l2(mesh, family);
    r.value = lp_norm(mesh, r.form, p);
    return r;
  }
  const Problem pr(mesh, family, scale);
  if (pr.num_vars() == 0) {
    CoreResult r = pr.result(Eigen::VectorXd());
    r.value = lp_norm(mesh, r.form, p);
    return r;
  }
  Eigen::VectorXd y;
  std::vector<double> p_stages;
  std::vector<double> eps_stages;
  if (options.initial_potential) {
    const Eigen::VectorXd& f = *options.initial_potential;
    if (f.size() != mesh.num_vertices()) fail(ErrorKind::kInvalidInput, "initial potential has wrong size");
    y = Eigen::VectorXd::Zero(pr.num_vars());
    for (int v = 1; v < mesh.num_vertices(); ++v) y(v - 1) = (f(v) - f(0)) / scale;
    p_stages = {p};
  } else {
    y = harmonic_vars(pr);
    if (p > 2.0) {
      for (double q = 2.0; q < p;) {
        q = std::min(p, 2.0 * q);
        p_stages.push_back(q);
      }
    } else {
      p_stages = {p};
    }
  }
  if (p < 2.0) eps_stages = {1e-4, 1e-6, 1e-8, 1e-10, 1e-12, 1e-16, 1e-20};
  else eps_stages = {0.0};

  int steps = 0;
  for (std::size_t i = 0; i < p_stages.size(); ++i) {
    for (std::size_t j = 0; j < eps_stages.size(); ++j) {
      const bool last = i + 1 == p_stages.size() && j + 1 == eps_stages.size();
      steps += newton_lp(pr, y, p_stages[i], eps_stages[j], last ? options.residual_tolerance : 1e-14,
                         options.max_newton_steps, last);
    }
  }
  CoreResult r = pr.result(y);
  r.residual = lp_residual(pr, y, p);
  r.iterations = steps;
  r.value = lp_norm(mesh, r.form, p);
  if (!(r.residual <= options.accept_tolerance))
    fail(ErrorKind::kConvergence, "L^" + std::to_string(p) + " minimizer did not converge (residual " +
                                      format_residual(r.residual) + ")");
  return r;
}

// Barrier method for min t subject to |x_s(y)| <= t on every top simplex.
CoreResult minimize_sup(const Mesh& mesh, const AffineFamily& family, const CoreOptions& options) {
  if (is_trivial(family)) return zero_result(mesh, family);
  const double scale = family_scale(mesh, family);
  if (scale == 0.0) {
    CoreResult r = minimize_l2(mesh, family);
    r.value = lp_norm(mesh, r.form, std::numeric_limits<double>::infinity());
    return r;
  }
  const Problem pr(mesh, family, scale);
  const int ny = pr.num_vars();
  const int m = pr.num_top();
  Eigen::VectorXd y = ny ? harmonic_vars(pr) : Eigen::VectorXd();
  double t = 1.05 * max_pointwise(pr, y) + 1e-3;
  const int nt = ny;
  const double nu = 2.0 * m;

  auto barrier = [&](const Eigen::VectorXd& yy, double tt, double tau, bool& feasible) {
    double f = tau * tt;
    feasible = tt > 0;
    if (!feasible) return 0.0;
    for (int s = 0; s < m; ++s) {
      const double q = tt * tt - pr.covector(s, yy).squaredNorm();
      if (!(q > 0)) {
        feasible = false;
        return 0.0;
      }
      f -= std::log(q);
    }
    return f;
  };

  SpdSolver solver;
  Triplets trips;
  double tau = nu / t;
  int steps = 0;
  const int step_cap = 40 * options.max_newton_steps;
  while (true) {
    for (int inner = 0; inner < 100; ++inner, ++steps) {
      if (steps > step_cap) fail(ErrorKind::kConvergence, "comass barrier method exceeded its step budget");
      Eigen::VectorXd g = Eigen::VectorXd::Zero(ny + 1);
      trips.clear();
      g(nt) = tau;
      for (int s = 0; s < m; ++s) {
        const Local& loc = pr.local(s);
        const Eigen::VectorXd x = loc.x0 + loc.jac * pr.gather(loc, y);
        const double q = t * t - x.squaredNorm();
        const int n = static_cast<int>(x.size());
        const Eigen::VectorXd gx = 2.0 * x / q;
        const Eigen::MatrixXd hxx =
            2.0 * Eigen::MatrixXd::Identity(n, n) / q + 4.0 * x * x.transpose() / (q * q);
        const Eigen::VectorXd hxt = -4.0 * t * x / (q * q);
        const double htt = -2.0 / q + 4.0 * t * t / (q * q);
        g(nt) += -2.0 * t / q;
        pr.scatter(loc, gx, hxx, g, &trips);
        const Eigen::VectorXd cross = loc.jac.transpose() * hxt;
        for (std::size_t i = 0; i < loc.vars.size(); ++i) {
          if (loc.vars[i] < 0) continue;
          trips.emplace_back(loc.vars[i], nt, cross(i));
          trips.emplace_back(nt, loc.vars[i], cross(i));
        }
        trips.emplace_back(nt, nt, htt);
      }
      const Eigen::VectorXd dir = solver.solve(ny + 1, trips, -g);
      const double decrement = -g.dot(dir);
      if (!std::isfinite(decrement)) fail(ErrorKind::kNumericalDegeneracy, "comass barrier produced a non-finite step");
      bool feasible = false;
      const double f0 = barrier(y, t, tau, feasible);
      // Below this the Armijo test only sees rounding of f0.
      if (decrement < std::max(1e-8, 1e-13 * std::abs(f0))) break;
      double alpha = 1.0;
      bool moved = false;
      while (alpha > 1e-14) {
        const Eigen::VectorXd ty = y + alpha * dir.head(ny);
        const double tt = t + alpha * dir(nt);
        const double f1 = barrier(ty, tt, tau, feasible);
        if (feasible && f1 <= f0 - 0.25 * alpha * decrement) {
          y = ty;
          t = tt;
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!moved) break;
    }
    if (nu / tau <= 1e-11 * t) break;
    tau *= 10.0;
  }
  CoreResult r = pr.result(y);
  r.value = lp_norm(mesh, r.form, std::numeric_limits<double>::infinity());
  r.residual = nu / (tau * t);
  r.iterations = steps;
  return r;
}

}  // namespace systola::detail
