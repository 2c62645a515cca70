#include "systola/linprog.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace systola::lp {
namespace {

class Tableau {
 public:
  // rows: constraints, last row: objective. Last column: rhs.
  Tableau(Eigen::MatrixXd t, std::vector<int> basis, double tol)
      : t_(std::move(t)), basis_(std::move(basis)), tol_(tol) {}

  Eigen::MatrixXd& table() { return t_; }
  std::vector<int>& basis() { return basis_; }
  int rows() const { return static_cast<int>(t_.rows()) - 1; }
  int rhs() const { return static_cast<int>(t_.cols()) - 1; }

  void pivot(int row, int col) {
    t_.row(row) /= t_(row, col);
    for (int r = 0; r < t_.rows(); ++r) {
      if (r == row) continue;
      const double f = t_(r, col);
      if (f != 0.0) t_.row(r) -= f * t_.row(row);
    }
    basis_[row] = col;
  }

  // Runs the simplex on columns [0, active_cols). The objective row holds
  // reduced costs; we minimise, so we enter columns with negative reduced cost.
  Status run(int active_cols, int max_iter) {
    for (int it = 0; it < max_iter; ++it) {
      int enter = -1;
      for (int j = 0; j < active_cols; ++j) {
        if (t_(rows(), j) < -tol_) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return Status::kOptimal;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int r = 0; r < rows(); ++r) {
        const double a = t_(r, enter);
        if (a > tol_) {
          const double ratio = t_(r, rhs()) / a;
          if (ratio < best - tol_ || (std::abs(ratio - best) <= tol_ && leave >= 0 &&
                                      basis_[r] < basis_[leave])) {
            best = ratio;
            leave = r;
          }
        }
      }
      if (leave < 0) return Status::kUnbounded;
      pivot(leave, enter);
    }
    return Status::kIterationLimit;
  }

 private:
  Eigen::MatrixXd t_;
  std::vector<int> basis_;
  double tol_;
};

}  // namespace

Result solve(const Problem& problem, double tolerance) {
  const int n = static_cast<int>(problem.c.size());
  const int m_eq = static_cast<int>(problem.a_eq.rows());
  const int m_ub = static_cast<int>(problem.a_ub.rows());
  const int m = m_eq + m_ub;
  // Columns: n structural, m_ub slacks, m artificials, rhs.
  const int n_struct = n + m_ub;
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m + 1, n_struct + m + 1);
  for (int r = 0; r < m_eq; ++r) {
    t.row(r).head(n) = problem.a_eq.row(r);
    t(r, n_struct + m) = problem.b_eq(r);
  }
  for (int r = 0; r < m_ub; ++r) {
    t.row(m_eq + r).head(n) = problem.a_ub.row(r);
    t(m_eq + r, n + r) = 1.0;
    t(m_eq + r, n_struct + m) = problem.b_ub(r);
  }
  std::vector<int> basis(m);
  for (int r = 0; r < m; ++r) {
    if (t(r, n_struct + m) < 0) t.row(r) *= -1.0;
    t(r, n_struct + r) = 1.0;
    basis[r] = n_struct + r;
  }
  // Phase 1 objective: sum of artificials, expressed in reduced form.
  for (int r = 0; r < m; ++r) t.row(m) -= t.row(r);
  for (int r = 0; r < m; ++r) t(m, n_struct + r) = 0.0;

  Tableau tab(std::move(t), std::move(basis), tolerance);
  const int max_iter = 50 * (n_struct + m + 10);
  Result result;
  Status s1 = tab.run(n_struct + m, max_iter);
  if (s1 == Status::kIterationLimit) {
    result.status = s1;
    return result;
  }
  const double scale = 1.0 + problem.b_eq.cwiseAbs().sum() + problem.b_ub.cwiseAbs().sum();
  if (-tab.table()(m, n_struct + m) > 1e-9 * scale) {
    result.status = Status::kInfeasible;
    return result;
  }
  // Drive artificials out of the basis where possible.
  for (int r = 0; r < m; ++r) {
    if (tab.basis()[r] < n_struct) continue;
    for (int j = 0; j < n_struct; ++j) {
      if (std::abs(tab.table()(r, j)) > 1e-9) {
        tab.pivot(r, j);
        break;
      }
    }
  }
  // Phase 2: rebuild objective row from the original costs.
  auto& tt = tab.table();
  tt.row(m).setZero();
  tt.row(m).head(n) = problem.c.transpose();
  for (int r = 0; r < m; ++r) {
    const int b = tab.basis()[r];
    if (b < n_struct && tt(m, b) != 0.0) tt.row(m) -= tt(m, b) * tt.row(r);
  }
  // Artificials still basic sit in redundant rows at value zero; block them
  // from re-entering by running only over structural columns.
  Status s2 = tab.run(n_struct, max_iter);
  result.status = s2;
  if (s2 != Status::kOptimal) return result;
  result.x = Eigen::VectorXd::Zero(n);
  for (int r = 0; r < m; ++r) {
    const int b = tab.basis()[r];
    if (b < n) result.x(b) = tt(r, n_struct + m);
  }
  result.objective = problem.c.dot(result.x);
  return result;
}

double l1_synthesis_norm(const Eigen::MatrixXd& generators, const Eigen::VectorXd& target) {
  const int dim = static_cast<int>(generators.rows());
  const int k = static_cast<int>(generators.cols());
  Problem p;
  p.a_eq.resize(dim, 2 * k);
  p.a_eq << generators, -generators;
  p.b_eq = target;
  p.a_ub.resize(0, 2 * k);
  p.b_ub.resize(0);
  p.c = Eigen::VectorXd::Ones(2 * k);
  const Result r = solve(p);
  if (r.status != Status::kOptimal) return std::numeric_limits<double>::infinity();
  return r.objective;
}

}  // namespace systola::lp
