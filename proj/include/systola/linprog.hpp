#pragma once

#include <Eigen/Dense>

namespace systola::lp {

enum class Status { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

// minimize c'x  subject to  A_eq x = b_eq,  A_ub x <= b_ub,  x >= 0.
// Either constraint block may have zero rows.
struct Problem {
  Eigen::MatrixXd a_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd a_ub;
  Eigen::VectorXd b_ub;
  Eigen::VectorXd c;
};

struct Result {
  Status status = Status::kInfeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
};

// Dense two-phase tableau simplex with Bland's rule. Meant for the small
// programs of this library (a few hundred columns at most).
Result solve(const Problem& problem, double tolerance = 1e-11);

// min sum|mu_i| subject to sum mu_i g_i = target, for generators g_i (columns).
// Returns +infinity when target is outside the span.
double l1_synthesis_norm(const Eigen::MatrixXd& generators, const Eigen::VectorXd& target);

}  // namespace systola::lp
