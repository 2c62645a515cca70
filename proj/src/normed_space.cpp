#include "systola/normed_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "systola/error.hpp"
#include "systola/linprog.hpp"

namespace systola {
namespace {

constexpr double kSymmetryTolerance = 1e-9;
constexpr double kSupportTolerance = 1e-9;
constexpr double kContactTolerance = 1e-7;
constexpr std::size_t kMaxFacetSubsets = 8'000'000;

int sym_size(int b) { return b * (b + 1) / 2; }

Eigen::VectorXd sym_vec(const Eigen::MatrixXd& m) {
  const int b = static_cast<int>(m.rows());
  Eigen::VectorXd out(sym_size(b));
  int k = 0;
  for (int i = 0; i < b; ++i)
    for (int j = i; j < b; ++j) out(k++) = m(i, j);
  return out;
}

// Flip so the first significant coordinate is positive.
Eigen::VectorXd canonical_sign(Eigen::VectorXd v) {
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12) {
      if (v(i) < 0) v = -v;
      break;
    }
  }
  return v;
}

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (int i = 0; i < a.size(); ++i) {
    if (a(i) < b(i) - 1e-12) return true;
    if (a(i) > b(i) + 1e-12) return false;
  }
  return false;
}

void check_symmetric_set(const Eigen::MatrixXd& pts, const char* what) {
  const double scale = pts.cwiseAbs().maxCoeff();
  for (int i = 0; i < pts.cols(); ++i) {
    bool found = false;
    for (int j = 0; j < pts.cols() && !found; ++j)
      found = (pts.col(i) + pts.col(j)).cwiseAbs().maxCoeff() <= kSymmetryTolerance * scale;
    if (!found)
      fail(ErrorKind::kInvalidNorm, std::string(what) + " is not closed under negation");
  }
}

void check_full_rank(const Eigen::MatrixXd& pts, const char* what) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(pts);
  lu.setThreshold(1e-10);
  if (lu.rank() < pts.rows())
    fail(ErrorKind::kInvalidNorm, std::string(what) + " does not span the space");
}

// Enumerates k-subsets of {0..n-1}; callback returns false to stop.
template <typename F>
void for_each_subset(int n, int k, F&& f) {
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    f(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

const char* to_string(NormKind kind) {
  switch (kind) {
    case NormKind::kPolytope: return "polytope";
    case NormKind::kFacets: return "facets";
    case NormKind::kEllipsoid: return "ellipsoid";
    case NormKind::kSamples: return "samples";
  }
  return "?";
}

NormBody NormBody::polytope(const Eigen::MatrixXd& vertices) {
  if (vertices.cols() == 0 || vertices.rows() == 0)
    fail(ErrorKind::kInvalidNorm, "empty polytope");
  if (!vertices.allFinite()) fail(ErrorKind::kInvalidNorm, "non-finite vertex");
  check_symmetric_set(vertices, "vertex list");
  check_full_rank(vertices, "vertex list");
  NormBody n;
  n.kind_ = NormKind::kPolytope;
  n.dim_ = static_cast<int>(vertices.rows());
  n.vertices_ = vertices;
  return n;
}

NormBody NormBody::facets(const Eigen::MatrixXd& normals) {
  if (normals.cols() == 0 || normals.rows() == 0) fail(ErrorKind::kInvalidNorm, "no facets");
  if (!normals.allFinite()) fail(ErrorKind::kInvalidNorm, "non-finite facet normal");
  check_full_rank(normals, "facet normals");
  NormBody n;
  n.kind_ = NormKind::kFacets;
  n.dim_ = static_cast<int>(normals.rows());
  // Keep one normal per +- pair, deduplicated.
  std::vector<Eigen::VectorXd> uniq;
  for (int j = 0; j < normals.cols(); ++j) {
    Eigen::VectorXd a = canonical_sign(normals.col(j));
    bool dup = false;
    for (const auto& u : uniq) dup = dup || (u - a).cwiseAbs().maxCoeff() < 1e-12;
    if (!dup) uniq.push_back(a);
  }
  std::sort(uniq.begin(), uniq.end(), lex_less);
  n.normals_.resize(n.dim_, static_cast<int>(uniq.size()));
  for (std::size_t j = 0; j < uniq.size(); ++j) n.normals_.col(static_cast<int>(j)) = uniq[j];
  return n;
}

NormBody NormBody::ellipsoid(const Eigen::MatrixXd& q) {
  if (q.rows() != q.cols() || q.rows() == 0) fail(ErrorKind::kInvalidNorm, "quadratic form not square");
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1 + q.cwiseAbs().maxCoeff()))
    fail(ErrorKind::kInvalidNorm, "quadratic form not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q);
  if (es.eigenvalues().minCoeff() <= 0) fail(ErrorKind::kInvalidNorm, "quadratic form not positive definite");
  NormBody n;
  n.kind_ = NormKind::kEllipsoid;
  n.dim_ = static_cast<int>(q.rows());
  n.q_ = 0.5 * (q + q.transpose());
  return n;
}

NormBody NormBody::samples(const Eigen::MatrixXd& directions, const Eigen::VectorXd& values) {
  if (directions.cols() != values.size())
    fail(ErrorKind::kInvalidNorm, "sample directions and values differ in count");
  if (values.size() == 0) fail(ErrorKind::kInvalidNorm, "no samples");
  if ((values.array() <= 0).any()) fail(ErrorKind::kInvalidNorm, "norm samples must be positive");
  Eigen::MatrixXd pts(directions.rows(), directions.cols());
  for (int j = 0; j < pts.cols(); ++j) pts.col(j) = directions.col(j) / values(j);
  NormBody n = polytope(pts);
  n.kind_ = NormKind::kSamples;
  double worst = 0.0;
  for (int j = 0; j < pts.cols(); ++j) {
    const double g = lp::l1_synthesis_norm(pts, pts.col(j));
    worst = std::max(worst, 1.0 - g);
  }
  n.discretization_error_ = worst;
  return n;
}

double NormBody::norm(const Eigen::VectorXd& x) const {
  switch (kind_) {
    case NormKind::kEllipsoid: return std::sqrt(std::max(0.0, x.dot(q_ * x)));
    case NormKind::kFacets: return (normals_.transpose() * x).cwiseAbs().maxCoeff();
    case NormKind::kPolytope:
    case NormKind::kSamples:
      if (x.isZero()) return 0.0;
      return lp::l1_synthesis_norm(vertices_, x);
  }
  return 0.0;
}

double NormBody::dual_norm(const Eigen::VectorXd& l) const {
  if (l.isZero()) return 0.0;
  switch (kind_) {
    case NormKind::kEllipsoid: return std::sqrt(l.dot(q_.ldlt().solve(l)));
    case NormKind::kFacets: return lp::l1_synthesis_norm(normals_, l);
    case NormKind::kPolytope:
    case NormKind::kSamples: return (vertices_.transpose() * l).maxCoeff();
  }
  return 0.0;
}

Eigen::MatrixXd NormBody::facet_normals() const {
  switch (kind_) {
    case NormKind::kFacets: return normals_;
    case NormKind::kPolytope:
    case NormKind::kSamples: return polytope_facets(vertices_);
    case NormKind::kEllipsoid: break;
  }
  fail(ErrorKind::kInvalidNorm, "ellipsoidal norm has no facets");
}

Eigen::MatrixXd polytope_facets(const Eigen::MatrixXd& vertices) {
  const int b = static_cast<int>(vertices.rows());
  const int m = static_cast<int>(vertices.cols());
  if (binomial(m, b) > static_cast<double>(kMaxFacetSubsets))
    fail(ErrorKind::kResource, "too many vertices for facet enumeration in dimension " +
                                   std::to_string(b));
  std::vector<Eigen::VectorXd> found;
  Eigen::MatrixXd sub(b, b);
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(b);
  for_each_subset(m, b, [&](const std::vector<int>& idx) {
    for (int i = 0; i < b; ++i) sub.col(i) = vertices.col(idx[i]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sub.transpose());
    lu.setThreshold(1e-10);
    if (!lu.isInvertible()) return;
    Eigen::VectorXd a = lu.solve(ones);
    if ((vertices.transpose() * a).cwiseAbs().maxCoeff() > 1.0 + kSupportTolerance) return;
    a = canonical_sign(a);
    for (const auto& f : found)
      if ((f - a).cwiseAbs().maxCoeff() <= 1e-9 * (1 + a.cwiseAbs().maxCoeff())) return;
    found.push_back(a);
  });
  if (found.empty()) fail(ErrorKind::kInvalidNorm, "polytope has no facets (degenerate)");
  std::sort(found.begin(), found.end(), lex_less);
  Eigen::MatrixXd out(b, static_cast<int>(found.size()));
  for (std::size_t j = 0; j < found.size(); ++j) out.col(static_cast<int>(j)) = found[j];
  return out;
}

Eigen::MatrixXd Rank1Decomposition::reconstruct() const {
  const int b = functionals.empty() ? 0 : static_cast<int>(functionals.front().size());
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(b, b);
  for (std::size_t i = 0; i < weights.size(); ++i)
    q += weights[i] * functionals[i] * functionals[i].transpose();
  return q;
}

// Log-barrier Newton method on the shape matrix P of { P^{1/2} u : |u| <= 1 }:
//   maximize log det P  subject to  a_j' P a_j <= 1.
// At each barrier center, P^{-1} = sum_j a_j a_j' / (t s_j), s_j = 1 - a_j' P a_j.
JohnResult john_ellipsoid_certified(const NormBody& norm, const JohnOptions& options) {
  const int b = norm.dim();
  JohnResult result;
  if (norm.kind() == NormKind::kEllipsoid) {
    result.ellipsoid.quadratic_form = norm.quadratic_form();
    result.contact_count = -1;
    return result;
  }
  const Eigen::MatrixXd a = norm.facet_normals();
  const int m = static_cast<int>(a.cols());
  const int s = sym_size(b);

  std::vector<Eigen::MatrixXd> basis;
  std::vector<std::pair<int, int>> pos;
  for (int i = 0; i < b; ++i)
    for (int j = i; j < b; ++j) {
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(b, b);
      e(i, j) = 1.0;
      e(j, i) = 1.0;
      basis.push_back(e);
      pos.emplace_back(i, j);
    }
  // g(j, k) = a_j' E_k a_j.
  Eigen::MatrixXd g(m, s);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < s; ++k) {
      const auto [r, c] = pos[k];
      g(j, k) = (r == c) ? a(r, j) * a(r, j) : 2.0 * a(r, j) * a(c, j);
    }

  const double amax = a.colwise().squaredNorm().maxCoeff();
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(b, b) * (0.5 / amax);
  auto to_vec = [&](const Eigen::MatrixXd& mat) { return sym_vec(mat); };
  auto to_mat = [&](const Eigen::VectorXd& v) {
    Eigen::MatrixXd mat(b, b);
    for (int k = 0; k < s; ++k) {
      const auto [r, c] = pos[k];
      mat(r, c) = v(k);
      mat(c, r) = v(k);
    }
    return mat;
  };
  auto slacks = [&](const Eigen::VectorXd& pv) { return Eigen::VectorXd(Eigen::VectorXd::Ones(m) - g * pv); };
  auto objective = [&](const Eigen::VectorXd& pv, double t, bool& ok) {
    const Eigen::MatrixXd pm = to_mat(pv);
    Eigen::LLT<Eigen::MatrixXd> llt(pm);
    const Eigen::VectorXd sl = slacks(pv);
    ok = llt.info() == Eigen::Success && (sl.array() > 0).all();
    if (!ok) return 0.0;
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return -t * logdet - sl.array().log().sum();
  };

  Eigen::VectorXd pv = to_vec(p);
  double t = 1.0;
  int iterations = 0;
  while (true) {
    for (int step = 0; step < options.max_newton_steps; ++step) {
      ++iterations;
      const Eigen::MatrixXd pm = to_mat(pv);
      const Eigen::MatrixXd w = pm.inverse();
      const Eigen::VectorXd sl = slacks(pv);
      Eigen::VectorXd grad(s);
      Eigen::MatrixXd hess(s, s);
      for (int k = 0; k < s; ++k) grad(k) = -t * (w * basis[k]).trace();
      for (int k = 0; k < s; ++k) {
        const Eigen::MatrixXd wk = w * basis[k];
        for (int l = k; l < s; ++l) {
          hess(k, l) = t * (wk * w * basis[l]).trace();
          hess(l, k) = hess(k, l);
        }
      }
      const Eigen::VectorXd inv_s = sl.cwiseInverse();
      grad += g.transpose() * inv_s;
      hess += g.transpose() * inv_s.cwiseAbs2().asDiagonal() * g;
      const Eigen::VectorXd dir = -hess.ldlt().solve(grad);
      const double decrement = -grad.dot(dir);
      if (decrement < 1e-14) break;
      bool ok = false;
      const double f0 = objective(pv, t, ok);
      double step_len = 1.0;
      while (step_len > 1e-20) {
        const Eigen::VectorXd trial = pv + step_len * dir;
        const double f1 = objective(trial, t, ok);
        if (ok && f1 <= f0 - 0.25 * step_len * decrement) {
          pv = trial;
          break;
        }
        step_len *= 0.5;
      }
      if (step_len <= 1e-20) break;
    }
    if (m / t < options.gap_tolerance) break;
    t *= 8.0;
    if (iterations > 100 * options.max_newton_steps)
      fail(ErrorKind::kConvergence, "John ellipsoid barrier method did not converge (gap " +
                                        std::to_string(m / t) + ")");
  }
  const Eigen::MatrixXd pm = to_mat(pv);
  result.ellipsoid.quadratic_form = pm.inverse();
  result.ellipsoid.quadratic_form =
      0.5 * (result.ellipsoid.quadratic_form + result.ellipsoid.quadratic_form.transpose());
  result.duality_gap = m / t;
  result.iterations = iterations;
  const Eigen::VectorXd sl = slacks(pv);
  result.contact_count = static_cast<int>((sl.array() < kContactTolerance).count());
  return result;
}

Ellipsoid john_ellipsoid(const NormBody& norm) { return john_ellipsoid_certified(norm).ellipsoid; }

Rank1Decomposition rank1_decomposition(const NormBody& norm, const Ellipsoid& ellipsoid) {
  const int b = norm.dim();
  const int s = sym_size(b);
  const Eigen::MatrixXd& q = ellipsoid.quadratic_form;
  if (q.rows() != b) fail(ErrorKind::kInvalidInput, "ellipsoid dimension does not match norm");
  Rank1Decomposition out;
  if (norm.kind() == NormKind::kEllipsoid) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q);
    for (int i = 0; i < b; ++i) {
      const Eigen::VectorXd l = std::sqrt(es.eigenvalues()(i)) * es.eigenvectors().col(i);
      out.weights.push_back(1.0);
      out.functionals.push_back(canonical_sign(l / norm.dual_norm(l)));
    }
    return out;
  }

  const Eigen::MatrixXd a = norm.facet_normals();
  const Eigen::MatrixXd w = q.inverse();
  std::vector<Eigen::VectorXd> contacts;
  for (int j = 0; j < a.cols(); ++j) {
    const double k = a.col(j).dot(w * a.col(j));
    if (k > 1.0 + 1e-6)
      fail(ErrorKind::kInvalidInput, "ellipsoid is not inscribed in the unit ball");
    if (k >= 1.0 - kContactTolerance) contacts.push_back(a.col(j));
  }
  if (static_cast<int>(contacts.size()) < b)
    fail(ErrorKind::kDegenerateContact,
         "only " + std::to_string(contacts.size()) + " contact points; ellipsoid is not optimal");
  std::sort(contacts.begin(), contacts.end(), lex_less);
  const int nc = static_cast<int>(contacts.size());

  // sum lambda_j a_j a_j' = Q, sum lambda_j = b, lambda >= 0.
  Eigen::MatrixXd sys(s + 1, nc);
  for (int j = 0; j < nc; ++j) {
    sys.col(j).head(s) = sym_vec(contacts[j] * contacts[j].transpose());
    sys(s, j) = 1.0;
  }
  Eigen::VectorXd rhs(s + 1);
  rhs.head(s) = sym_vec(q);
  rhs(s) = b;
  lp::Problem prob;
  prob.a_eq = sys;
  prob.b_eq = rhs;
  prob.a_ub.resize(0, nc);
  prob.b_ub.resize(0);
  prob.c = Eigen::VectorXd::Zero(nc);
  const lp::Result r = lp::solve(prob);
  if (r.status != lp::Status::kOptimal)
    fail(ErrorKind::kDegenerateContact, "identity is not in the cone of contact forms; ellipsoid is not optimal");

  std::vector<int> support;
  for (int j = 0; j < nc; ++j)
    if (r.x(j) > 1e-14) support.push_back(j);

  auto refine = [&](const std::vector<int>& sup, int rows) {
    Eigen::MatrixXd sub(rows, static_cast<int>(sup.size()));
    for (std::size_t i = 0; i < sup.size(); ++i) sub.col(static_cast<int>(i)) = sys.col(sup[i]).head(rows);
    return Eigen::VectorXd(sub.colPivHouseholderQr().solve(rhs.head(rows)));
  };
  Eigen::VectorXd lam = refine(support, s + 1);

  bool reduced = static_cast<int>(support.size()) <= s;
  if (!reduced) {
    // One more Caratheodory step on the rank-1 forms alone. Contact points have
    // a'Q^{-1}a = 1, so a null combination of the forms has zero weight sum.
    Eigen::MatrixXd forms(s, static_cast<int>(support.size()));
    for (std::size_t i = 0; i < support.size(); ++i) forms.col(static_cast<int>(i)) = sys.col(support[i]).head(s);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(forms, Eigen::ComputeFullV);
    const Eigen::VectorXd mu = svd.matrixV().col(svd.matrixV().cols() - 1);
    double step = std::numeric_limits<double>::infinity();
    int drop = -1;
    for (int i = 0; i < mu.size(); ++i) {
      const double mi = (mu.sum() < 0 ? -mu(i) : mu(i));
      if (mi > 1e-14 && lam(i) / mi < step) {
        step = lam(i) / mi;
        drop = i;
      }
    }
    if (drop >= 0) {
      std::vector<int> smaller;
      for (std::size_t i = 0; i < support.size(); ++i)
        if (static_cast<int>(i) != drop) smaller.push_back(support[i]);
      const Eigen::VectorXd lam2 = refine(smaller, s);
      if ((lam2.array() > 0).all() && std::abs(lam2.sum() - b) <= 1e-9 * b) {
        support = smaller;
        lam = lam2;
        reduced = true;
      }
    }
  }
  out.reduced = reduced;
  for (std::size_t i = 0; i < support.size(); ++i) {
    out.weights.push_back(lam(static_cast<int>(i)));
    out.functionals.push_back(contacts[support[i]]);
  }
  return out;
}

IsometryEmbedding::IsometryEmbedding(const Rank1Decomposition& decomp) {
  const int n = static_cast<int>(decomp.count());
  const int b = n == 0 ? 0 : static_cast<int>(decomp.functionals.front().size());
  matrix_.resize(n, b);
  for (int i = 0; i < n; ++i)
    matrix_.row(i) = std::sqrt(decomp.weights[i]) * decomp.functionals[i].transpose();
}

Eigen::MatrixXd IsometryEmbedding::projection_inverse() const {
  const Eigen::MatrixXd q = matrix_.transpose() * matrix_;
  return q.ldlt().solve(matrix_.transpose());
}

IsometryEmbedding isometry_embedding(const Rank1Decomposition& decomp) { return IsometryEmbedding(decomp); }

}  // namespace systola
