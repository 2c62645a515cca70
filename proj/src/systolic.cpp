#include "systola/systolic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <string>
#include <tuple>
#include <unordered_map>

#include "systola/abel_jacobi.hpp"
#include "systola/error.hpp"
#include "systola/normed_space.hpp"

namespace systola {
namespace {

void check_torus_topology(const Mesh& mesh, const HomologyData& homology) {
  if (homology.b1 != mesh.dim() || !homology.torsion.empty() || (mesh.dim() == 2 && mesh.euler_characteristic() != 0))
    fail(ErrorKind::kUnsupportedTopology, "pi-systole needs a torus mesh (b1 = dim, no torsion)");
}

// (vertex, deck translation) packed into one key; translations stay tiny.
constexpr int kCoordBits = 10;
constexpr int kCoordOffset = 1 << (kCoordBits - 1);

long long cover_key(int v, const std::array<int, 3>& g) {
  long long key = v;
  for (int c : g) {
    if (std::abs(c) >= kCoordOffset) fail(ErrorKind::kResource, "abelian cover search left its window");
    key = (key << kCoordBits) | (c + kCoordOffset);
  }
  return key;
}

IntVector canonical(IntVector h) {
  for (int i = 0; i < h.size(); ++i) {
    if (h(i) > 0) break;
    if (h(i) < 0) return -h;
  }
  return h;
}

double norm_of(const Mesh& mesh, const HomologyData& homology, const IntVector& h, double p, const SolverOptions& o) {
  return homology_norm(homology, h.cast<double>(), p, mesh, o);
}

std::vector<Form> harmonic_forms(const Mesh& mesh, const HomologyData& homology) {
  std::vector<Form> out;
  for (int j = 0; j < homology.b1; ++j)
    out.push_back(harmonic_representative(make_class(homology, Eigen::VectorXd::Unit(homology.b1, j)), mesh).form);
  return out;
}

// Relative spread of |omega_i| / |omega_0| over simplices: zero when all
// minimizers share one conformal factor.
double ratio_spread(const Mesh& mesh, const std::vector<Form>& forms) {
  const Eigen::VectorXd base = pointwise_norms(mesh, forms[0]);
  double worst = 0.0;
  for (std::size_t i = 1; i < forms.size(); ++i) {
    const Eigen::VectorXd r = pointwise_norms(mesh, forms[i]).cwiseQuotient(base);
    worst = std::max(worst, (r.maxCoeff() - r.minCoeff()) / r.mean());
  }
  return worst;
}

struct Signature {
  double spread = 0.0;
  double conformality = 0.0;
  double hermite = 0.0;
};

// Equality signature: constant-norm forms, a conformal Abel-Jacobi map and a
// critical John lattice. p = inf uses harmonic forms and the stable norm; a
// finite p uses L^p minimizers on a unit-volume copy.
Signature signature(const Mesh& mesh, const HomologyData& homology, double p, const VerifyOptions& options) {
  const int b = homology.b1;
  Signature s;
  std::vector<Form> forms;
  Eigen::MatrixXd target;
  if (std::isinf(p)) {
    forms = harmonic_forms(mesh, homology);
    for (const Form& f : forms) s.spread = std::max(s.spread, norm_spread(mesh, f));
    target = harmonic_gram(mesh, homology).inverse();
    const NormBody body = homology_norm_body(mesh, homology, kInfinity, options.body_samples, options.systole.solver);
    s.hermite = hermite_ratio(Lattice::from_gram(john_ellipsoid(body).quadratic_form));
    s.conformality = conformality_defect(abel_jacobi_map(mesh, homology, forms, target));
    return s;
  }
  const Mesh unit = normalize_volume(mesh);
  for (int j = 0; j < b; ++j)
    forms.push_back(lp_minimizer(make_class(homology, Eigen::VectorXd::Unit(b, j)), p, unit, options.systole.solver).form);
  if (p == unit.dim()) {
    s.spread = ratio_spread(unit, forms);
  } else {
    for (const Form& f : forms) s.spread = std::max(s.spread, norm_spread(unit, f));
  }
  const NormBody body = homology_norm_body(unit, homology, p, options.body_samples, options.systole.solver);
  target = john_ellipsoid(body).quadratic_form;
  s.hermite = hermite_ratio(Lattice::from_gram(target));
  s.conformality = conformality_defect(abel_jacobi_map(unit, homology, forms, target));
  return s;
}

void add_signature(InequalityReport& r, const Signature& s, int b, const VerifyOptions& o) {
  r.diagnostics["constant_norm_spread"] = {s.spread, o.spread_tolerance, s.spread <= o.spread_tolerance};
  r.diagnostics["aj_conformality"] = {s.conformality, 1.0 + o.conformality_tolerance,
                                      s.conformality <= 1.0 + o.conformality_tolerance};
  const double crit = std::abs(s.hermite / hermite_catalog_constant(b) - 1.0);
  r.diagnostics["john_lattice_criticality"] = {crit, o.criticality_tolerance, crit <= o.criticality_tolerance};
}

void require(bool ok, const std::string& hypothesis) {
  if (!ok) fail(ErrorKind::kPrecondition, "hypothesis failed: " + hypothesis);
}

}  // namespace

double pi_systole(const Mesh& mesh) { return pi_systole(mesh, homology_basis(mesh)); }

double pi_systole(const Mesh& mesh, const HomologyData& homology) {
  check_torus_topology(mesh, homology);
  const int b = homology.b1;
  const int nv = mesh.num_vertices();
  // Deck translation picked up along each edge: the cobasis cocycle values.
  std::vector<std::array<int, 3>> label(mesh.num_edges(), {0, 0, 0});
  for (int e = 0; e < mesh.num_edges(); ++e)
    for (int j = 0; j < b; ++j) label[e][j] = static_cast<int>(homology.h1_cobasis[j](e));
  std::vector<std::vector<std::pair<int, int>>> adj(nv);
  for (int e = 0; e < mesh.num_edges(); ++e) {
    adj[mesh.edges()[e][0]].push_back({e, 1});
    adj[mesh.edges()[e][1]].push_back({e, -1});
  }

  double best = std::numeric_limits<double>::infinity();
  using Item = std::tuple<double, int, std::array<int, 3>>;
  for (int source = 0; source < nv; ++source) {
    std::unordered_map<long long, double> dist;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    const std::array<int, 3> zero{0, 0, 0};
    dist[cover_key(source, zero)] = 0.0;
    queue.push({0.0, source, zero});
    while (!queue.empty()) {
      auto [d, v, g] = queue.top();
      queue.pop();
      if (d >= best) break;
      if (d > dist[cover_key(v, g)]) continue;
      if (v == source && g != zero) {
        best = d;
        break;
      }
      for (auto [e, dir] : adj[v]) {
        const int w = dir > 0 ? mesh.edges()[e][1] : mesh.edges()[e][0];
        std::array<int, 3> h = g;
        for (int j = 0; j < b; ++j) h[j] += dir * label[e][j];
        const double nd = d + mesh.edge_lengths()[e];
        if (nd >= best) continue;
        const long long key = cover_key(w, h);
        auto it = dist.find(key);
        if (it != dist.end() && it->second <= nd) continue;
        dist[key] = nd;
        queue.push({nd, w, h});
      }
    }
  }
  return best;
}

SystoleResult norm_systole(const Mesh& mesh, const HomologyData& homology, double p, const SystoleOptions& options) {
  const int b = homology.b1;
  if (b == 0) fail(ErrorKind::kUnsupportedTopology, "first Betti number is zero");
  const std::vector<Form> h = harmonic_forms(mesh, homology);
  const Eigen::MatrixXd m = harmonic_gram(mesh, homology);
  const Eigen::MatrixXd gram = m.inverse();
  const Eigen::MatrixXd w = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).operatorInverseSqrt();

  // |alpha|*_p <= vol^{1/p} max |harm alpha| <= vol^{1/p} C |alpha|_M, hence
  // ||h||_p >= |h|_{M^-1} / (C vol^{1/p}).
  double c = 0.0;
  for (int s = 0; s < mesh.num_top(); ++s) {
    Eigen::MatrixXd a(mesh.dim(), b);
    for (int j = 0; j < b; ++j) a.col(j) = local_covector(mesh, s, h[j]);
    c = std::max(c, Eigen::JacobiSVD<Eigen::MatrixXd>(a * w).singularValues()(0));
  }
  SystoleResult out;
  out.certified_factor = c * (std::isinf(p) ? 1.0 : std::pow(mesh.volume(), 1.0 / p));

  std::map<std::vector<long long>, double> values;
  auto evaluate = [&](const IntVector& v) {
    const IntVector k = canonical(v);
    const std::vector<long long> key(k.data(), k.data() + k.size());
    auto it = values.find(key);
    if (it != values.end()) return it->second;
    const double n = norm_of(mesh, homology, k, p, options.solver);
    ++out.evaluated;
    values[key] = n;
    return n;
  };
  auto euclid = [&](const IntVector& v) {
    const Eigen::VectorXd x = v.cast<double>();
    return std::sqrt(x.dot(gram * x));
  };

  double best = std::numeric_limits<double>::infinity();
  for (const IntVector& v : shortest_vectors(Lattice::from_gram(gram)).vectors) best = std::min(best, evaluate(v));
  std::vector<IntVector> cands =
      enumerate_short_vectors(gram, best * out.certified_factor * (1 + 1e-9), options.max_candidates);
  std::sort(cands.begin(), cands.end(), [&](const IntVector& a, const IntVector& bb) { return euclid(a) < euclid(bb); });
  for (const IntVector& v : cands) {
    if (euclid(v) / out.certified_factor > best * (1 + 1e-12)) break;
    best = std::min(best, evaluate(v));
  }
  out.value = best;
  for (const auto& [key, n] : values)
    if (n <= best * (1 + 1e-7)) out.minimizers.push_back(Eigen::Map<const IntVector>(key.data(), b));
  return out;
}

double stable_systole(const Mesh& mesh, const SystoleOptions& options) {
  return norm_systole(mesh, homology_basis(mesh), kInfinity, options).value;
}

double conformal_systole(const Mesh& mesh, const SystoleOptions& options) {
  return norm_systole(normalize_volume(mesh), homology_basis(mesh), mesh.dim(), options).value;
}

double lp_systole(const Mesh& mesh, double p, const SystoleOptions& options) {
  return norm_systole(mesh, homology_basis(mesh), p, options).value;
}

const char* to_string(InequalityId id) {
  switch (id) {
    case InequalityId::k10: return "10";
    case InequalityId::k10c: return "10c";
    case InequalityId::k23: return "23";
    case InequalityId::k23c: return "23c";
    case InequalityId::k28: return "28";
    case InequalityId::k11: return "11";
    case InequalityId::kEq12: return "eq12";
  }
  return "?";
}

const std::vector<InequalityId>& all_inequalities() {
  static const std::vector<InequalityId> ids{InequalityId::k10,  InequalityId::k10c, InequalityId::k23,
                                             InequalityId::k23c, InequalityId::k28,  InequalityId::k11,
                                             InequalityId::kEq12};
  return ids;
}

InequalityId parse_inequality(const std::string& id) {
  for (InequalityId i : all_inequalities())
    if (id == to_string(i)) return i;
  fail(ErrorKind::kInvalidInput, "unknown inequality id '" + id + "'");
}

bool InequalityReport::diagnostics_pass() const {
  return std::all_of(diagnostics.begin(), diagnostics.end(), [](const auto& d) { return d.second.passed; });
}

void finalize_report(InequalityReport& r, const VerifyOptions& o) {
  if (!std::isfinite(r.lhs) || !std::isfinite(r.rhs) || !(r.rhs > 0))
    fail(ErrorKind::kNumericalDegeneracy, std::string("inequality ") + to_string(r.id) + " has non-finite sides");
  r.slack = r.rhs - r.lhs;
  r.ratio = r.lhs / r.rhs;
  r.equality_flag = r.ratio > 1.0 - o.equality_tolerance;
  r.slack_ok = r.slack >= -o.slack_tolerance * std::max(1.0, r.rhs);
  for (const auto& [k, v] : r.quantities)
    if (!std::isfinite(v)) fail(ErrorKind::kNumericalDegeneracy, "quantity " + k + " is not finite");
  r.provenance.source = o.source;
  r.provenance.refinement = o.refinement;
  auto& t = r.provenance.tolerances;
  t["equality"] = o.equality_tolerance;
  t["slack"] = o.slack_tolerance;
  t["spread"] = o.spread_tolerance;
  t["conformality"] = o.conformality_tolerance;
  t["criticality"] = o.criticality_tolerance;
}

InequalityReport verify(const Mesh& mesh, InequalityId id, const VerifyOptions& options) {
  if (id == InequalityId::k11) fail(ErrorKind::kPrecondition, "inequality 11 is verified on closed-form fixtures only");
  const HomologyData hom = homology_basis(mesh);
  const int n = mesh.dim(), b = hom.b1;
  if (b == 0) fail(ErrorKind::kUnsupportedTopology, "first Betti number is zero");
  InequalityReport r;
  r.id = id;
  r.quantities["n"] = n;
  r.quantities["b"] = b;
  const double vol = mesh.volume();
  r.quantities["vol"] = vol;

  if (id == InequalityId::k28) {
    const double st = norm_systole(mesh, hom, kInfinity, options.systole).value;
    const double conf = norm_systole(normalize_volume(mesh), hom, n, options.systole).value;
    r.quantities["stsys"] = st;
    r.quantities["confsys"] = conf;
    r.lhs = st;
    r.rhs = conf * std::pow(vol, 1.0 / n);
    finalize_report(r, options);
    return r;
  }

  require(n == b, "n = b (dimension equals first Betti number)");
  const double gamma = hermite_catalog_constant(b);
  r.quantities["gamma_term"] = gamma;
  const DegreeReport deg = degree(harmonic_abel_jacobi_map(mesh, hom));
  r.quantities["deg"] = deg.degree;
  r.quantities["signed_deg"] = deg.signed_degree;

  double sig_p = kInfinity;
  switch (id) {
    case InequalityId::k10:
    case InequalityId::kEq12: {
      const double st = norm_systole(mesh, hom, kInfinity, options.systole).value;
      r.quantities["stsys"] = st;
      r.lhs = deg.degree * std::pow(st, id == InequalityId::k10 ? n : b);
      r.rhs = gamma * vol;
      break;
    }
    case InequalityId::k10c:
    case InequalityId::k23c: {
      const double conf = norm_systole(normalize_volume(mesh), hom, n, options.systole).value;
      r.quantities["confsys"] = conf;
      r.lhs = deg.degree * std::pow(conf, id == InequalityId::k10c ? n : b);
      r.rhs = id == InequalityId::k10c ? gamma : gamma * std::pow(vol, n - b);
      r.provenance.p = n;
      r.quantities["rhs_unit_volume"] = gamma;
      if (id == InequalityId::k23c && std::abs(r.rhs - gamma) > 1e-12 * gamma)
        r.notes["exponent"] = "vol^(n-b) differs from the unit-volume form";
      sig_p = n;
      break;
    }
    case InequalityId::k23: {
      const double p = options.p.value_or(std::max(b, 2));
      require(std::abs(vol - 1.0) <= options.systole.solver.volume_tolerance, "unit volume");
      require(p >= std::max(b, 2), "p >= max(b, 2)");
      const double lam = norm_systole(mesh, hom, p, options.systole).value;
      r.quantities["lp_systole"] = lam;
      r.provenance.p = p;
      r.lhs = deg.degree * std::pow(lam, b);
      r.rhs = gamma;
      sig_p = p;
      break;
    }
    default:
      fail(ErrorKind::kInternal, "unhandled inequality");
  }
  if (options.diagnostics) add_signature(r, signature(mesh, hom, sig_p, options), b, options);
  finalize_report(r, options);
  return r;
}

}  // namespace systola
