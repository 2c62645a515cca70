#include "systola/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "systola/error.hpp"
#include "systola/linprog.hpp"

namespace systola {
namespace {

constexpr double kPdTolerance = 1e-12;

void check_dim(int b) {
  if (b < 1 || b > kMaxLatticeDim) {
    fail(ErrorKind::kUnsupportedDimension,
         "lattice dimension " + std::to_string(b) + " outside [1, 8]");
  }
}

Eigen::MatrixXd reversal(int n) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) p(i, n - 1 - i) = 1.0;
  return p;
}

// Upper triangle of a symmetric matrix as a vector.
Eigen::VectorXd sym_vec(const Eigen::MatrixXd& m) {
  const int b = static_cast<int>(m.rows());
  Eigen::VectorXd out(b * (b + 1) / 2);
  int k = 0;
  for (int i = 0; i < b; ++i)
    for (int j = i; j < b; ++j) out(k++) = m(i, j);
  return out;
}

// One representative per +-pair.
std::vector<IntVector> half_set(const std::vector<IntVector>& vs) {
  std::vector<IntVector> out;
  for (const auto& v : vs) {
    int lead = 0;
    while (lead < v.size() && v(lead) == 0) ++lead;
    if (lead < v.size() && v(lead) > 0) out.push_back(v);
  }
  return out;
}

}  // namespace

const char* to_string(Eutaxy e) {
  switch (e) {
    case Eutaxy::kEutactic: return "eutactic";
    case Eutaxy::kNotEutactic: return "not-eutactic";
    case Eutaxy::kIndeterminate: return "indeterminate";
  }
  return "?";
}

Lattice Lattice::from_gram(const Eigen::MatrixXd& gram) {
  const int b = static_cast<int>(gram.rows());
  check_dim(b);
  if (gram.cols() != b) fail(ErrorKind::kInvalidLattice, "gram matrix is not square");
  if (!gram.allFinite()) fail(ErrorKind::kInvalidLattice, "gram matrix has non-finite entries");
  if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + gram.cwiseAbs().maxCoeff()))
    fail(ErrorKind::kInvalidLattice, "gram matrix is not symmetric");
  const Eigen::MatrixXd sym = 0.5 * (gram + gram.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.eigenvalues().minCoeff() <= kPdTolerance * std::max(1.0, es.eigenvalues().maxCoeff()))
    fail(ErrorKind::kInvalidLattice, "gram matrix is not positive definite");
  // Lower-triangular B with B'B = G: reverse-order Cholesky.
  const Eigen::MatrixXd p = reversal(b);
  Eigen::LLT<Eigen::MatrixXd> llt(p * sym * p);
  const Eigen::MatrixXd lrev = llt.matrixL();
  Eigen::MatrixXd basis = p * lrev.transpose() * p;
  const double covol = basis.diagonal().prod();
  return Lattice(sym, std::move(basis), covol);
}

Lattice Lattice::from_basis(const Eigen::MatrixXd& basis) {
  if (basis.rows() != basis.cols())
    fail(ErrorKind::kInvalidLattice, "basis must be square");
  return from_gram(basis.transpose() * basis);
}

double Lattice::length(const IntVector& v) const { return length(Eigen::VectorXd(v.cast<double>())); }

double Lattice::length(const Eigen::VectorXd& v) const {
  return std::sqrt(std::max(0.0, v.dot(gram_ * v)));
}

Lattice Lattice::scaled(double c) const {
  if (!(c > 0)) fail(ErrorKind::kInvalidInput, "lattice scale must be positive");
  return from_gram(c * c * gram_);
}

Lattice Lattice::change_basis(const Eigen::MatrixXi& u) const {
  const Eigen::MatrixXd ud = u.cast<double>();
  if (std::abs(std::abs(ud.determinant()) - 1.0) > 1e-9)
    fail(ErrorKind::kInvalidInput, "change of basis is not unimodular");
  return from_gram(ud.transpose() * gram_ * ud);
}

std::vector<IntVector> enumerate_short_vectors(const Eigen::MatrixXd& gram, double radius,
                                               std::size_t max_count) {
  const int b = static_cast<int>(gram.rows());
  check_dim(b);
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) fail(ErrorKind::kInvalidLattice, "gram not positive definite");
  // |Bx|^2 = sum_i q_ii (x_i + sum_{j>i} mu_ij x_j)^2 with R = L'.
  const Eigen::MatrixXd r = llt.matrixU();
  Eigen::VectorXd q(b);
  Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(b, b);
  for (int i = 0; i < b; ++i) {
    q(i) = r(i, i) * r(i, i);
    for (int j = i + 1; j < b; ++j) mu(i, j) = r(i, j) / r(i, i);
  }
  const double r2 = radius * radius;
  std::vector<IntVector> out;
  IntVector x = IntVector::Zero(b);

  std::function<void(int, double)> recurse = [&](int i, double partial) {
    double center = 0.0;
    for (int j = i + 1; j < b; ++j) center -= mu(i, j) * static_cast<double>(x(j));
    const double slack = (r2 - partial) / q(i);
    if (slack < 0) return;
    const double w = std::sqrt(slack);
    const long long lo = static_cast<long long>(std::ceil(center - w - 1e-12));
    const long long hi = static_cast<long long>(std::floor(center + w + 1e-12));
    for (long long xi = lo; xi <= hi; ++xi) {
      x(i) = xi;
      const double d = static_cast<double>(xi) - center;
      const double next = partial + q(i) * d * d;
      if (next > r2 * (1 + 1e-14) + 1e-300) continue;
      if (i == 0) {
        if (!x.isZero()) {
          out.push_back(x);
          if (out.size() > max_count)
            fail(ErrorKind::kResource, "short-vector enumeration exceeded candidate limit");
        }
      } else {
        recurse(i - 1, next);
      }
    }
    x(i) = 0;
  };
  recurse(b - 1, 0.0);
  return out;
}

MinimalVectorSet shortest_vectors(const Lattice& lattice, double relative_tolerance) {
  const int b = lattice.dim();
  // Any basis vector bounds lambda_1 from above.
  double bound = std::sqrt(lattice.gram().diagonal().minCoeff());
  std::vector<IntVector> cand = enumerate_short_vectors(lattice.gram(), bound * (1 + 1e-9));
  double best = bound;
  for (const auto& v : cand) best = std::min(best, lattice.length(v));
  MinimalVectorSet out;
  out.length = best;
  const double cut = best * (1 + relative_tolerance);
  if (cut > bound * (1 + 1e-9)) cand = enumerate_short_vectors(lattice.gram(), cut * (1 + 1e-12));
  for (auto& v : cand)
    if (lattice.length(v) <= cut) out.vectors.push_back(v);
  std::sort(out.vectors.begin(), out.vectors.end(), [b](const IntVector& a, const IntVector& c) {
    for (int i = 0; i < b; ++i)
      if (a(i) != c(i)) return a(i) < c(i);
    return false;
  });
  return out;
}

double hermite_ratio(const Lattice& lattice) {
  const MinimalVectorSet mv = shortest_vectors(lattice);
  return std::pow(mv.length, lattice.dim()) / lattice.covolume();
}

bool is_perfect(const Lattice& lattice, double relative_tolerance) {
  const int b = lattice.dim();
  const auto half = half_set(shortest_vectors(lattice, relative_tolerance).vectors);
  const int s = b * (b + 1) / 2;
  Eigen::MatrixXd m(s, static_cast<int>(half.size()));
  for (std::size_t j = 0; j < half.size(); ++j) {
    const Eigen::VectorXd v = half[j].cast<double>();
    m.col(static_cast<int>(j)) = sym_vec(v * v.transpose());
  }
  if (m.cols() < s) return false;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  lu.setThreshold(1e-9);
  return lu.rank() == s;
}

EutaxyResult eutaxy(const Lattice& lattice, double margin_tolerance, double relative_tolerance) {
  const int b = lattice.dim();
  const MinimalVectorSet mv = shortest_vectors(lattice, relative_tolerance);
  const auto half = half_set(mv.vectors);
  const int k = static_cast<int>(half.size());
  const int s = b * (b + 1) / 2;
  // Scale so lambda_1 = 1; target is G^{-1} in integer coordinates.
  const Eigen::MatrixXd g = lattice.gram() / (mv.length * mv.length);
  const Eigen::VectorXd target = sym_vec(g.inverse());
  // Variables: c'_j >= 0 (k), delta+ , delta-.  c_j = c'_j + delta.
  lp::Problem p;
  p.a_eq.resize(s, k + 2);
  for (int j = 0; j < k; ++j) {
    const Eigen::VectorXd v = half[j].cast<double>();
    p.a_eq.col(j) = sym_vec(v * v.transpose());
  }
  const Eigen::VectorXd colsum = p.a_eq.leftCols(k).rowwise().sum();
  p.a_eq.col(k) = colsum;
  p.a_eq.col(k + 1) = -colsum;
  p.b_eq = target;
  p.a_ub = Eigen::MatrixXd::Zero(1, k + 2);
  p.a_ub(0, k) = 1.0;
  p.b_ub = Eigen::VectorXd::Ones(1);
  p.c = Eigen::VectorXd::Zero(k + 2);
  p.c(k) = -1.0;
  p.c(k + 1) = 1.0;
  const lp::Result r = lp::solve(p);
  EutaxyResult out;
  if (r.status == lp::Status::kInfeasible) {
    out.verdict = Eutaxy::kNotEutactic;
    out.margin = -std::numeric_limits<double>::infinity();
    return out;
  }
  if (r.status != lp::Status::kOptimal) {
    out.verdict = Eutaxy::kIndeterminate;
    return out;
  }
  out.margin = r.x(k) - r.x(k + 1);
  if (out.margin > margin_tolerance)
    out.verdict = Eutaxy::kEutactic;
  else if (out.margin < -margin_tolerance)
    out.verdict = Eutaxy::kNotEutactic;
  else
    out.verdict = Eutaxy::kIndeterminate;
  return out;
}

bool is_eutactic(const Lattice& lattice) { return eutaxy(lattice).verdict == Eutaxy::kEutactic; }

double hermite_catalog_constant(int b) {
  switch (b) {
    case 1: return 1.0;
    case 2: return 2.0 / std::sqrt(3.0);
    case 3: return std::sqrt(2.0);
    case 4: return 2.0;
    default:
      fail(ErrorKind::kUnsupportedDimension,
           "critical lattice catalog covers 1 <= b <= 4, got " + std::to_string(b));
  }
}

Lattice critical_lattice(int b) {
  Eigen::MatrixXd g;
  switch (b) {
    case 1: g = Eigen::MatrixXd::Ones(1, 1); break;
    case 2: g.resize(2, 2); g << 1, 0.5, 0.5, 1; break;
    case 3: g.resize(3, 3); g << 2, 1, 1, 1, 2, 1, 1, 1, 2; break;
    case 4:
      g.resize(4, 4);
      g << 2, -1, 0, 0,
          -1, 2, -1, -1,
           0, -1, 2, 0,
           0, -1, 0, 2;
      break;
    default:
      fail(ErrorKind::kUnsupportedDimension,
           "critical lattice catalog covers 1 <= b <= 4, got " + std::to_string(b));
  }
  return Lattice::from_gram(g);
}

}  // namespace systola
