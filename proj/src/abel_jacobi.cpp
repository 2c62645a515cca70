#include "systola/abel_jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

#include "systola/error.hpp"

namespace systola {
namespace {

constexpr double kIntegralTolerance = 1e-6;
constexpr double kBoundaryTolerance = 1e-9;

// Lift increments of the edges (0,i) of simplex s, oriented away from v_0.
Eigen::MatrixXd local_increments(const PLTorusMap& map, int s) {
  const TopSimplex& t = map.mesh.top(s);
  const int n = map.mesh.dim();
  Eigen::MatrixXd d(map.target_dim(), n);
  for (int i = 0; i < n; ++i) d.col(i) = t.signs[i] * map.increments.col(t.edges[i]);
  return d;
}

// W with W'W = target gram, so |W x| is the target length of x.
Eigen::MatrixXd target_root(const Eigen::MatrixXd& gram) {
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) fail(ErrorKind::kInvalidMetric, "target Gram matrix is not positive definite");
  return llt.matrixU();
}

// Singular values of the differential in the target metric, decreasing.
Eigen::VectorXd singular_values(const PLTorusMap& map, const Eigen::MatrixXd& root, int s) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(root * map.differential(s)).singularValues();
}

void check_map_inputs(const Mesh& mesh, const Eigen::MatrixXd& increments, const Eigen::MatrixXd& gram) {
  if (increments.cols() != mesh.num_edges())
    fail(ErrorKind::kInvalidForm, "increments need one column per edge");
  if (gram.rows() != increments.rows() || gram.cols() != increments.rows())
    fail(ErrorKind::kInvalidMetric, "target Gram matrix does not match the target dimension");
  if (!increments.allFinite()) fail(ErrorKind::kInvalidForm, "increments are not finite");
}

Eigen::MatrixXd stack(const std::vector<Form>& forms, int edges) {
  Eigen::MatrixXd m(static_cast<int>(forms.size()), edges);
  for (std::size_t i = 0; i < forms.size(); ++i) {
    if (forms[i].size() != edges) fail(ErrorKind::kInvalidForm, "form has wrong number of values");
    m.row(static_cast<int>(i)) = forms[i].transpose();
  }
  return m;
}

double radical_inverse(long long i, int base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

// Halton points with a fixed irrational shift, so that no sample sits on the
// rational grid where mesh vertices of torus maps usually land.
class RegularValues {
 public:
  explicit RegularValues(int b) : b_(b) {}
  Eigen::VectorXd next() {
    static constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19};
    Eigen::VectorXd y(b_);
    ++index_;
    for (int i = 0; i < b_; ++i) {
      const double shift = std::sqrt(static_cast<double>(kPrimes[i])) - std::floor(std::sqrt(kPrimes[i]));
      const double v = radical_inverse(index_, kPrimes[i]) + shift;
      y(i) = v - std::floor(v);
    }
    return y;
  }

 private:
  int b_;
  long long index_ = 0;
};

struct ImageSimplex {
  Eigen::VectorXd origin;
  Eigen::MatrixXd inverse;  // of the edge matrix
  Eigen::VectorXd lo, hi;
  int sign = 0;
};

struct PreimageCounter {
  std::vector<ImageSimplex> simplices;

  explicit PreimageCounter(const PLTorusMap& map) {
    const int b = map.target_dim();
    if (map.mesh.dim() != b) fail(ErrorKind::kUnsupportedDimension, "preimage counts need equal dimensions");
    double scale = 0.0;
    std::vector<double> dets(map.mesh.num_top());
    for (int s = 0; s < map.mesh.num_top(); ++s) {
      dets[s] = local_increments(map, s).determinant();
      scale = std::max(scale, std::abs(dets[s]));
    }
    if (scale == 0.0) fail(ErrorKind::kDegenerateMap, "map collapses every simplex");
    for (int s = 0; s < map.mesh.num_top(); ++s) {
      if (std::abs(dets[s]) <= 1e-13 * scale) continue;  // image of measure zero
      const Eigen::MatrixXd img = map.simplex_image(s);
      ImageSimplex im;
      im.origin = img.col(0);
      im.inverse = (img.rightCols(b).colwise() - im.origin).inverse();
      im.lo = img.rowwise().minCoeff();
      im.hi = img.rowwise().maxCoeff();
      im.sign = dets[s] > 0 ? 1 : -1;
      simplices.push_back(std::move(im));
    }
  }

  // Unsigned and signed counts; nullopt when y is (numerically) not regular.
  std::optional<std::pair<int, int>> count(const Eigen::VectorXd& y) const {
    const int b = static_cast<int>(y.size());
    int total = 0, signed_total = 0;
    Eigen::VectorXi g(b), g_lo(b), g_hi(b);
    for (const ImageSimplex& im : simplices) {
      bool empty = false;
      for (int i = 0; i < b; ++i) {
        g_lo(i) = static_cast<int>(std::ceil(im.lo(i) - y(i) - kBoundaryTolerance));
        g_hi(i) = static_cast<int>(std::floor(im.hi(i) - y(i) + kBoundaryTolerance));
        if (g_lo(i) > g_hi(i)) empty = true;
      }
      if (empty) continue;
      g = g_lo;
      while (true) {
        const Eigen::VectorXd bary = im.inverse * (y + g.cast<double>() - im.origin);
        const double last = 1.0 - bary.sum();
        const double m = std::min(bary.minCoeff(), last);
        if (std::abs(m) <= kBoundaryTolerance) return std::nullopt;
        if (m > 0) {
          ++total;
          signed_total += im.sign;
        }
        int i = 0;
        while (i < b && g(i) == g_hi(i)) {
          g(i) = g_lo(i);
          ++i;
        }
        if (i == b) break;
        ++g(i);
      }
    }
    return std::make_pair(total, signed_total);
  }
};

}  // namespace

Eigen::MatrixXd PLTorusMap::differential(int s) const {
  // D = df R' with R the lower frame factor.
  const Eigen::MatrixXd d = local_increments(*this, s);
  const Eigen::MatrixXd& r = mesh.top_frame(s);
  return r.triangularView<Eigen::Lower>().solve(d.transpose()).transpose();
}

Eigen::MatrixXd PLTorusMap::simplex_image(int s) const {
  const Eigen::MatrixXd d = local_increments(*this, s);
  Eigen::MatrixXd img(target_dim(), d.cols() + 1);
  img.col(0) = vertex_values.col(mesh.top(s).vertices[0]);
  for (int i = 0; i < d.cols(); ++i) img.col(i + 1) = img.col(0) + d.col(i);
  return img;
}

PLTorusMap make_torus_map(const Mesh& mesh, const HomologyData& homology, const Eigen::MatrixXd& increments,
                          const Eigen::MatrixXd& target_gram) {
  check_map_inputs(mesh, increments, target_gram);
  const int b = static_cast<int>(increments.rows());
  for (int i = 0; i < b; ++i)
    if (!is_closed(mesh, increments.row(i).transpose(), 1e-8))
      fail(ErrorKind::kInvalidForm, "increment component " + std::to_string(i) + " is not closed");

  PLTorusMap map{mesh, target_gram, increments, Eigen::MatrixXd::Zero(b, mesh.num_vertices()),
                 Eigen::MatrixXi::Zero(b, mesh.num_edges()), Eigen::MatrixXd::Zero(b, homology.b1)};

  // Breadth-first spanning tree from vertex 0.
  std::vector<std::vector<std::pair<int, int>>> adj(mesh.num_vertices());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    adj[mesh.edges()[e][0]].push_back({e, 1});
    adj[mesh.edges()[e][1]].push_back({e, -1});
  }
  std::vector<bool> seen(mesh.num_vertices(), false);
  std::queue<int> queue;
  queue.push(0);
  seen[0] = true;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop();
    for (auto [e, dir] : adj[v]) {
      const int w = dir > 0 ? mesh.edges()[e][1] : mesh.edges()[e][0];
      if (seen[w]) continue;
      seen[w] = true;
      map.vertex_values.col(w) = map.vertex_values.col(v) + dir * increments.col(e);
      queue.push(w);
    }
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end())
    fail(ErrorKind::kInvalidMesh, "mesh is not connected");

  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Eigen::VectorXd gap = map.vertex_values.col(mesh.edges()[e][1]) -
                                map.vertex_values.col(mesh.edges()[e][0]) - increments.col(e);
    for (int i = 0; i < b; ++i) {
      const double r = std::round(gap(i));
      if (std::abs(gap(i) - r) > kIntegralTolerance)
        fail(ErrorKind::kInvalidForm, "map is not equivariant: a period is not an integer");
      map.edge_shifts(i, e) = static_cast<int>(r);
    }
  }
  for (int j = 0; j < homology.b1; ++j)
    map.period_matrix.col(j) = increments * homology.h1_basis[j].cast<double>();
  return map;
}

PLTorusMap abel_jacobi_map(const Mesh& mesh, const HomologyData& homology, const std::vector<Form>& forms,
                           const std::optional<Eigen::MatrixXd>& target_gram) {
  const int b = homology.b1;
  if (static_cast<int>(forms.size()) != b)
    fail(ErrorKind::kInvalidBasis, "need " + std::to_string(b) + " forms, got " + std::to_string(forms.size()));
  if (b == 0) fail(ErrorKind::kUnsupportedTopology, "first Betti number is zero");
  for (const Form& f : forms) {
    if (f.size() != mesh.num_edges()) fail(ErrorKind::kInvalidForm, "form has wrong number of values");
    if (!is_closed(mesh, f, 1e-8)) fail(ErrorKind::kInvalidForm, "form is not closed");
  }
  const Eigen::MatrixXd raw = stack(forms, mesh.num_edges());
  Eigen::MatrixXd p(b, b);
  for (int i = 0; i < b; ++i) p.row(i) = periods(homology, forms[i]).transpose();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(p);
  if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-12 * std::pow(p.norm(), b))
    fail(ErrorKind::kInvalidBasis, "forms do not span H^1");
  const Eigen::MatrixXd gram = target_gram ? *target_gram : Eigen::MatrixXd(harmonic_gram(mesh, homology).inverse());
  return make_torus_map(mesh, homology, lu.inverse() * raw, gram);
}

PLTorusMap harmonic_abel_jacobi_map(const Mesh& mesh, const HomologyData& homology) {
  std::vector<Form> h;
  for (int j = 0; j < homology.b1; ++j)
    h.push_back(harmonic_representative(make_class(homology, Eigen::VectorXd::Unit(homology.b1, j)), mesh).form);
  return abel_jacobi_map(mesh, homology, h);
}

PLTorusMap linear_torus_map(const Mesh& mesh, const HomologyData& homology, const Eigen::MatrixXd& a,
                            const Eigen::MatrixXd& target_gram) {
  if (!mesh.edge_displacements()) fail(ErrorKind::kInvalidMesh, "linear maps need a torus mesh with displacements");
  const Eigen::MatrixXd& disp = *mesh.edge_displacements();
  if (a.cols() != disp.rows()) fail(ErrorKind::kInvalidInput, "matrix does not match the torus dimension");
  if ((a.array() - a.array().round()).abs().maxCoeff() > 1e-12)
    fail(ErrorKind::kInvalidInput, "linear torus maps need an integer matrix");
  return make_torus_map(mesh, homology, a * disp, target_gram);
}

PLTorusMap bi_map(const Mesh& mesh, const HomologyData& homology, const Rank1Decomposition& decomp,
                  const std::vector<Form>& minimizers, double p) {
  const int b = homology.b1;
  if (decomp.count() != minimizers.size()) fail(ErrorKind::kInvalidInput, "one minimizer per functional is needed");
  if (decomp.count() == 0) fail(ErrorKind::kInvalidInput, "empty decomposition");
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(b, b);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(b, mesh.num_edges());
  for (std::size_t i = 0; i < decomp.count(); ++i) {
    const Eigen::VectorXd& l = decomp.functionals[i];
    const Form& w = minimizers[i];
    if (l.size() != b) fail(ErrorKind::kInvalidInput, "functional has wrong dimension");
    if (w.size() != mesh.num_edges()) fail(ErrorKind::kInvalidForm, "minimizer has wrong number of values");
    if (!is_closed(mesh, w, 1e-8)) fail(ErrorKind::kInvalidForm, "minimizer is not closed");
    if ((periods(homology, w) - l).norm() > 1e-8 * std::max(1.0, l.norm()))
      fail(ErrorKind::kInvalidForm, "minimizer is not in the class of its functional");
    const Eigen::VectorXd pn = pointwise_norms(mesh, w);
    double norm = 0.0;
    for (int s = 0; s < mesh.num_top(); ++s) norm += mesh.top_volume(s) * std::pow(pn(s), p);
    norm = std::pow(norm, 1.0 / p);
    if (std::abs(norm - 1.0) > 1e-6)
      fail(ErrorKind::kInvalidInput, "minimizer " + std::to_string(i) + " has L^p norm " + std::to_string(norm));
    q += decomp.weights[i] * l * l.transpose();
    sum += decomp.weights[i] * l * w.transpose();
  }
  return make_torus_map(mesh, homology, q.ldlt().solve(sum), q);
}

BIConstruction bi_construction(const Mesh& mesh, const HomologyData& homology, double p, const BIOptions& options) {
  if (std::isinf(p)) fail(ErrorKind::kWrongExponent, "the construction needs a finite exponent");
  const NormBody body = homology_norm_body(mesh, homology, p, options.samples, options.solver);
  const JohnResult john = john_ellipsoid_certified(body);
  const Rank1Decomposition dec = rank1_decomposition(body, john.ellipsoid);
  std::vector<Form> minimizers;
  std::vector<double> norms, spreads;
  for (const Eigen::VectorXd& l : dec.functionals) {
    const MinimizerResult r = lp_minimizer(make_class(homology, l), p, mesh, options.solver);
    minimizers.push_back(r.form);
    norms.push_back(r.norm);
    spreads.push_back(norm_spread(mesh, r.form));
  }
  PLTorusMap map = bi_map(mesh, homology, dec, minimizers, p);
  return BIConstruction{p, body, john, dec, std::move(minimizers), std::move(norms), std::move(spreads), std::move(map)};
}

JacobianField jacobian_field(const PLTorusMap& map, JacobianMode mode) {
  const int n = map.mesh.dim(), b = map.target_dim();
  const Eigen::MatrixXd root = target_root(map.target_gram);
  JacobianField out;
  out.values = Eigen::VectorXd::Zero(map.mesh.num_top());
  out.signs = Eigen::VectorXd::Zero(map.mesh.num_top());
  for (int s = 0; s < map.mesh.num_top(); ++s) {
    const Eigen::MatrixXd j = root * map.differential(s);
    double v = 0.0;
    if (mode == JacobianMode::kFull) {
      v = b < n ? 0.0 : std::sqrt(std::max(0.0, (j.transpose() * j).determinant()));
    } else {
      const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(j).singularValues();
      v = sv.prod();
    }
    out.values(s) = v;
    if (n == b) {
      const double d = j.determinant();
      out.signs(s) = d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0);
    }
    out.integral += map.mesh.top_volume(s) * v;
  }
  return out;
}

double conformality_defect(const PLTorusMap& map) {
  const Eigen::MatrixXd root = target_root(map.target_gram);
  std::vector<Eigen::VectorXd> svs;
  double top = 0.0;
  for (int s = 0; s < map.mesh.num_top(); ++s) {
    svs.push_back(singular_values(map, root, s));
    top = std::max(top, svs.back().prod());
  }
  if (top == 0.0) fail(ErrorKind::kDegenerateMap, "map collapses every simplex");
  double worst = 1.0;
  for (const Eigen::VectorXd& sv : svs)
    if (sv.prod() > 1e-12 * top) worst = std::max(worst, sv(0) / sv(sv.size() - 1));
  return worst;
}

JensenChainReport jensen_chain_check(const BIConstruction& bi, double tolerance) {
  const PLTorusMap& map = bi.map;
  const Mesh& mesh = map.mesh;
  const int b = map.target_dim();
  const double p = bi.p;
  if (p < std::max<double>(b, 2.0))
    fail(ErrorKind::kWrongExponent, "the chain needs p >= max(b, 2)");
  const Rank1Decomposition& dec = bi.decomposition;
  const int count = static_cast<int>(dec.count());
  const Eigen::MatrixXd root = target_root(map.target_gram);

  JensenChainReport r;
  r.p = p;
  r.tolerance = tolerance;
  const char* names[] = {"projection", "am-gm", "trace", "power-mean"};
  std::vector<ChainStep> pointwise(4);
  for (int k = 0; k < 4; ++k) {
    pointwise[k].name = names[k];
    pointwise[k].min_slack = std::numeric_limits<double>::infinity();
  }
  double g_integral = 0.0;
  for (int s = 0; s < mesh.num_top(); ++s) {
    const double vol = mesh.top_volume(s);
    Eigen::MatrixXd df(count, mesh.dim());  // rows sqrt(lambda_i) omega_i
    double sq = 0.0, pw = 0.0;
    for (int i = 0; i < count; ++i) {
      const Eigen::VectorXd c = local_covector(mesh, s, bi.minimizers[i]);
      df.row(i) = std::sqrt(dec.weights[i]) * c.transpose();
      sq += dec.weights[i] / b * c.squaredNorm();
      pw += dec.weights[i] / b * std::pow(c.norm(), p);
    }
    // Sigma: orthogonal complement of the kernel of df, completed to dimension b.
    const Eigen::MatrixXd j = root * map.differential(s);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(j, Eigen::ComputeFullV);
    const Eigen::MatrixXd sigma = svd.matrixV().leftCols(std::min<int>(b, mesh.dim()));
    const Eigen::MatrixXd g = sigma.transpose() * df.transpose() * df * sigma;
    const double values[5] = {
        svd.singularValues().prod(),
        std::sqrt(std::max(0.0, g.determinant())),
        std::pow(g.trace() / b, b / 2.0),
        std::pow(sq, b / 2.0),
        std::pow(pw, b / p),
    };
    for (int k = 0; k < 4; ++k) {
      pointwise[k].min_slack = std::min(pointwise[k].min_slack, values[k + 1] - values[k]);
      pointwise[k].lhs += vol * values[k];
      pointwise[k].rhs += vol * values[k + 1];
    }
    r.integral_jacobian += vol * values[0];
    g_integral += vol * pw;
  }
  r.steps = pointwise;
  // Hoelder with exponent p/b >= 1, then sum lambda_i/b |omega_i|_p^p = 1.
  ChainStep hoelder{"hoelder", 0.0, pointwise[3].rhs, std::pow(g_integral, b / p) * std::pow(mesh.volume(), 1.0 - b / p)};
  hoelder.min_slack = hoelder.rhs - hoelder.lhs;
  double normalization = 0.0;
  for (int i = 0; i < count; ++i) {
    const Eigen::VectorXd pn = pointwise_norms(mesh, bi.minimizers[i]);
    double norm = 0.0;
    for (int s = 0; s < mesh.num_top(); ++s) norm += mesh.top_volume(s) * std::pow(pn(s), p);
    normalization += dec.weights[i] / b * norm;
  }
  ChainStep norm_step{"normalization", 0.0, std::pow(normalization, b / p) * std::pow(mesh.volume(), 1.0 - b / p), 1.0};
  norm_step.min_slack = norm_step.rhs - norm_step.lhs;
  r.steps.push_back(hoelder);
  r.steps.push_back(norm_step);
  r.holds = std::all_of(r.steps.begin(), r.steps.end(),
                        [&](const ChainStep& c) { return c.min_slack >= -tolerance; });
  return r;
}

JensenChainReport jensen_chain_check(const Mesh& mesh, const HomologyData& homology, double p,
                                     const BIOptions& options) {
  if (p < std::max<double>(homology.b1, 2.0))
    fail(ErrorKind::kWrongExponent, "the chain needs p >= max(b, 2)");
  return jensen_chain_check(bi_construction(mesh, homology, p, options));
}

WedgeBoundReport lichnerowicz_check(const Mesh& mesh, const HomologyData& homology) {
  if (mesh.dim() != 2) fail(ErrorKind::kUnsupportedDimension, "wedge bound is for surfaces");
  if (homology.b1 < 2) fail(ErrorKind::kUnsupportedTopology, "need two independent classes");
  const int b = homology.b1;
  std::vector<Form> h;
  for (int j = 0; j < b; ++j)
    h.push_back(harmonic_representative(make_class(homology, Eigen::VectorXd::Unit(b, j)), mesh).form);
  const Eigen::MatrixXd m = harmonic_gram(mesh, homology);
  const Eigen::MatrixXd w = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).operatorInverseSqrt();
  Form o1 = Form::Zero(mesh.num_edges()), o2 = Form::Zero(mesh.num_edges());
  for (int j = 0; j < b; ++j) {
    o1 += w(0, j) * h[j];
    o2 += w(1, j) * h[j];
  }
  WedgeBoundReport r;
  for (int s = 0; s < mesh.num_top(); ++s) {
    const Eigen::Vector2d a = local_covector(mesh, s, o1), c = local_covector(mesh, s, o2);
    r.wedge_integral += mesh.top_volume(s) * std::abs(a(0) * c(1) - a(1) * c(0));
    r.energy_bound += 0.5 * mesh.top_volume(s) * (a.squaredNorm() + c.squaredNorm());
  }
  r.slack = r.energy_bound - r.wedge_integral;
  r.holds = r.slack >= -1e-10;
  return r;
}

CoareaReport coarea_check(const PLTorusMap& map, int samples) {
  if (samples <= 0) fail(ErrorKind::kInvalidInput, "need a positive sample count");
  const PreimageCounter counter(map);
  RegularValues seq(map.target_dim());
  CoareaReport r;
  long long total = 0;
  while (r.samples < samples) {
    if (r.rejected > samples) fail(ErrorKind::kNumericalDegeneracy, "too many non-regular sample values");
    const auto c = counter.count(seq.next());
    if (!c) {
      ++r.rejected;
      continue;
    }
    total += c->first;
    ++r.samples;
  }
  r.jacobian_integral = jacobian_field(map, JacobianMode::kFull).integral;
  r.preimage_estimate = static_cast<double>(total) / samples * std::sqrt(map.target_gram.determinant());
  r.relative_error = std::abs(r.preimage_estimate - r.jacobian_integral) / std::max(r.jacobian_integral, 1e-300);
  return r;
}

DegreeReport degree(const PLTorusMap& map, int regular_values) {
  if (regular_values <= 0) fail(ErrorKind::kInvalidInput, "need at least one regular value");
  const PreimageCounter counter(map);
  RegularValues seq(map.target_dim());
  DegreeReport r;
  int attempts = 0;
  while (r.regular_values < regular_values) {
    if (++attempts > 100 * regular_values) fail(ErrorKind::kNumericalDegeneracy, "no regular values found");
    const auto c = counter.count(seq.next());
    if (!c) continue;
    if (r.regular_values > 0 && c->second != r.signed_degree)
      fail(ErrorKind::kNumericalDegeneracy, "signed preimage counts disagree: " + std::to_string(c->second) +
                                                " vs " + std::to_string(r.signed_degree));
    r.signed_degree = c->second;
    ++r.regular_values;
  }
  r.degree = std::abs(r.signed_degree);
  return r;
}

}  // namespace systola
