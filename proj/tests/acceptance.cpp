// Acceptance suite: one PASS/FAIL line per criterion. Optional arguments
// select criteria by number.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "systola/abel_jacobi.hpp"
#include "systola/cohomology.hpp"
#include "systola/fixtures.hpp"
#include "systola/normed_space.hpp"
#include "systola/systolic.hpp"

using namespace systola;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Collects failed checks and a few headline numbers.
class Checks {
 public:
  void require(bool ok, const std::string& what) {
    ++total_;
    if (!ok && failures_.size() < 4) failures_.push_back(what);
    failed_ += !ok;
  }
  void note(const std::string& s) { notes_.push_back(s); }
  bool passed() const { return failed_ == 0; }
  std::string summary() const {
    std::ostringstream out;
    out << total_ - failed_ << "/" << total_ << " checks";
    for (const std::string& n : notes_) out << "; " << n;
    for (const std::string& f : failures_) out << "; FAILED: " << f;
    return out.str();
  }

 private:
  int total_ = 0, failed_ = 0;
  std::vector<std::string> failures_, notes_;
};

Lattice unit_hexagonal() { return Lattice::from_gram(testing::hexagonal_gram() * (2.0 / std::sqrt(3.0))); }
Lattice square() { return Lattice::from_gram(Eigen::MatrixXd::Identity(2, 2)); }

Mesh perturbed(const Lattice& l, int k, const TorusMetric& metric) { return normalize_volume(torus_mesh(l, k, metric)); }

double lp_of(const Mesh& mesh, const Form& form, double p) {
  const Eigen::VectorXd n = pointwise_norms(mesh, form);
  double s = 0.0;
  for (int i = 0; i < mesh.num_top(); ++i) s += mesh.top_volume(i) * std::pow(n(i), p);
  return std::pow(s, 1.0 / p);
}

void loewner(Checks& c) {
  std::vector<double> ratios;
  for (int k : {8, 16, 32}) {
    const auto t0 = Clock::now();
    const InequalityReport r = verify(flat_torus_mesh(unit_hexagonal(), k), InequalityId::k10);
    const double t = seconds_since(t0);
    ratios.push_back(r.ratio);
    c.require(t <= 60.0, "A2 k=" + std::to_string(k) + " took " + fmt("%.1f s", t));
    c.require(r.slack_ok, "A2 slack k=" + std::to_string(k));
  }
  c.require(ratios.back() >= 0.98, "A2 ratio at k=32 is " + fmt("%.6f", ratios.back()));
  for (std::size_t i = 0; i + 1 < ratios.size(); ++i)
    c.require(ratios[i + 1] >= ratios[i] - 1e-12, "A2 ratio decreases with k");
  c.note("A2 ratios " + fmt("%.12f", ratios[0]) + ", " + fmt("%.12f", ratios[1]) + ", " + fmt("%.12f", ratios[2]));

  const auto t0 = Clock::now();
  const InequalityReport sq = verify(flat_torus_mesh(square(), 32), InequalityId::k10);
  c.require(seconds_since(t0) <= 60.0, "Z^2 k=32 over a minute");
  c.require(std::abs(sq.ratio - std::sqrt(3.0) / 2.0) <= 0.02, "Z^2 ratio " + fmt("%.6f", sq.ratio));
  c.note("Z^2 ratio " + fmt("%.6f", sq.ratio));
}

void conformal_invariance(Checks& c) {
  const Lattice hex = unit_hexagonal();
  const double flat = conformal_systole(flat_torus_mesh(hex, 32));
  const Mesh bumped = perturbed(hex, 32, conformal_bump_metric(hex.gram(), 0.3));
  const double bump = conformal_systole(bumped);
  const double drift = std::abs(bump / flat - 1.0);
  c.require(drift <= 0.01, "conformal systole drift " + fmt("%.2e", drift));
  const InequalityReport conf = verify(bumped, InequalityId::k10c);
  c.require(conf.equality_flag, "10c equality flag lost under the conformal bump");
  const InequalityReport stretch = verify(perturbed(hex, 32, stretch_bump_metric(hex.gram(), 0.3)), InequalityId::k10c);
  c.require(stretch.ratio < 0.97, "10c ratio under the stretch " + fmt("%.6f", stretch.ratio));
  c.require(conf.slack_ok && stretch.slack_ok, "10c slack");
  c.note("drift " + fmt("%.2e", drift) + ", conformal 10c ratio " + fmt("%.6f", conf.ratio) + ", stretch 10c ratio " +
         fmt("%.6f", stretch.ratio));
}

void rank1_suite(Checks& c) {
  testing::Rng rng(20260101);
  int extra = 0;
  double worst_time = 0.0;
  for (int i = 0; i < 50; ++i) {
    const int b = 2 + i % 3;
    const int m = b + 1 + static_cast<int>(testing::uniform(rng, 0.0, 2.0 * b));
    const NormBody body = NormBody::polytope(testing::random_symmetric_polytope(rng, b, m));
    const auto t0 = Clock::now();
    const Ellipsoid john = john_ellipsoid(body);
    const Rank1Decomposition d = rank1_decomposition(body, john);
    const double t = seconds_since(t0);
    worst_time = std::max(worst_time, t);
    const std::string tag = "norm " + std::to_string(i) + " (b=" + std::to_string(b) + ")";
    const std::size_t bound = b * (b + 1) / 2;
    c.require(d.count() <= bound + 1, tag + " has " + std::to_string(d.count()) + " terms");
    extra += d.count() == bound + 1;
    double sum = 0.0;
    for (std::size_t j = 0; j < d.count(); ++j) {
      sum += d.weights[j];
      c.require(d.weights[j] > 0, tag + " non-positive weight");
      c.require(std::abs(body.dual_norm(d.functionals[j]) - 1.0) <= 1e-6, tag + " functional off the unit sphere");
    }
    c.require(std::abs(sum - b) <= 1e-8, tag + " weights sum to " + fmt("%.12f", sum));
    c.require((d.reconstruct() - john.quadratic_form).norm() <= 1e-7, tag + " reconstruction error");
    c.require(t <= 10.0, tag + " took " + fmt("%.1f s", t));
  }
  c.note(std::to_string(extra) + " decompositions accepted at b(b+1)/2 + 1 terms");
  c.note("slowest " + fmt("%.3f s", worst_time));
}

void bi_bound(Checks& c) {
  testing::Rng rng(77);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Lattice l = i % 2 == 0 ? unit_hexagonal() : Lattice::from_gram(testing::random_gram(rng, 2, 0.3));
    const Mesh mesh = perturbed(l, 32, random_metric(l.gram(), 0.3, 1000 + i));
    const BIConstruction bi = bi_construction(mesh, homology_basis(mesh), 2.0);
    const double integral = jacobian_field(bi.map).integral;
    worst = std::max(worst, integral);
    c.require(integral <= 1.02, "perturbed torus " + std::to_string(i) + " integral " + fmt("%.6f", integral));
  }
  const Mesh flat = flat_torus_mesh(unit_hexagonal(), 32);
  const BIConstruction bi = bi_construction(flat, homology_basis(flat), 2.0);
  const double integral = jacobian_field(bi.map).integral;
  double spread = 0.0;
  for (double s : bi.minimizer_spreads) spread = std::max(spread, s);
  const double conformality = conformality_defect(bi.map);
  c.require(std::abs(integral - 1.0) <= 5e-3, "flat critical integral " + fmt("%.8f", integral));
  c.require(spread < 1e-2, "minimizer norm spread " + fmt("%.2e", spread));
  c.require(conformality < 1.01, "singular-value ratio " + fmt("%.6f", conformality));
  c.note("max perturbed integral " + fmt("%.6f", worst) + ", flat integral " + fmt("%.10f", integral) + ", spread " +
         fmt("%.1e", spread) + ", conformality " + fmt("%.8f", conformality));
}

std::vector<Mesh> surface_meshes() {
  testing::Rng rng(5);
  const Lattice hex = unit_hexagonal();
  std::vector<Mesh> meshes{flat_torus_mesh(hex, 8),
                           flat_torus_mesh(square(), 8),
                           testing::bump_torus(8, 0.5),
                           testing::bump_torus(8, 0.9),
                           perturbed(hex, 8, conformal_bump_metric(hex.gram(), 0.4)),
                           perturbed(hex, 8, stretch_bump_metric(hex.gram(), 0.4))};
  for (int i = 0; i < 4; ++i) {
    const Lattice l = Lattice::from_gram(testing::random_gram(rng, 2, 0.3));
    meshes.push_back(perturbed(l, 8, random_metric(l.gram(), 0.4, 300 + i)));
  }
  return meshes;
}

void jensen_chain(Checks& c) {
  double min_slack = std::numeric_limits<double>::infinity();
  int chains = 0;
  const std::vector<Mesh> surfaces = surface_meshes();
  for (std::size_t i = 0; i < surfaces.size(); ++i)
    for (double p : {2.0, 3.0, 4.0}) {
      const JensenChainReport r = jensen_chain_check(surfaces[i], homology_basis(surfaces[i]), p);
      ++chains;
      for (const ChainStep& s : r.steps) {
        min_slack = std::min(min_slack, s.min_slack);
        c.require(s.min_slack >= -1e-10, "surface " + std::to_string(i) + " p=" + fmt("%g", p) + " step " + s.name);
      }
    }
  const Lattice cubic = Lattice::from_gram(Eigen::MatrixXd::Identity(3, 3));
  const Mesh flat3 = flat_torus_mesh(cubic, 3);
  const Mesh bump3 = testing::bump_torus(3, 0.5, 3);
  for (const Mesh* m : {&flat3, &bump3}) {
    const JensenChainReport r = jensen_chain_check(normalize_volume(*m), homology_basis(*m), 3.0);
    ++chains;
    for (const ChainStep& s : r.steps) {
      min_slack = std::min(min_slack, s.min_slack);
      c.require(s.min_slack >= -1e-10, "3-torus step " + s.name);
    }
  }
  double wedge_slack = std::numeric_limits<double>::infinity();
  for (const Mesh& m : surfaces) {
    const WedgeBoundReport r = lichnerowicz_check(m, homology_basis(m));
    wedge_slack = std::min(wedge_slack, r.slack);
    c.require(r.holds && r.slack >= -1e-10, "wedge bound slack " + fmt("%.3e", r.slack));
  }
  c.note(std::to_string(chains) + " chains, min step slack " + fmt("%.3e", min_slack));
  c.note(std::to_string(surfaces.size()) + " wedge checks, min slack " + fmt("%.3e", wedge_slack));
}

void lp_theory(Checks& c) {
  const std::vector<double> ps{1.5, 2.0, 3.0, 4.0, 8.0, kInfinity};
  testing::Rng rng(6);
  const Lattice hex = unit_hexagonal();
  const std::vector<Mesh> curved{testing::bump_torus(8, 0.7), perturbed(hex, 8, random_metric(hex.gram(), 0.4, 41)),
                                 perturbed(hex, 8, stretch_bump_metric(hex.gram(), 0.4))};
  for (const Mesh& m : curved) {
    const HomologyData hom = homology_basis(m);
    for (int t = 0; t < 2; ++t) {
      const NormProfile pr = norm_profile(make_class(hom, testing::random_vector(rng, 2, 2.0)), m, ps);
      for (std::size_t i = 0; i + 1 < pr.norms.size(); ++i)
        c.require(pr.norms[i] <= pr.norms[i + 1] + 1e-6, "profile decreases between p=" + fmt("%g", pr.p_values[i]));
    }
  }

  double flat_spread = 0.0;
  for (const Lattice& l : {hex, square(), Lattice::from_gram(testing::random_gram(rng, 2, 0.3)).scaled(1.0)}) {
    const Mesh m = normalize_volume(flat_torus_mesh(l, 8));
    const HomologyData hom = homology_basis(m);
    const CohomologyClass cls = make_class(hom, testing::random_vector(rng, 2, 2.0));
    const NormProfile pr = norm_profile(cls, m, ps);
    const auto [lo, hi] = std::minmax_element(pr.norms.begin(), pr.norms.end());
    const double spread = (*hi - *lo) / *hi;
    flat_spread = std::max(flat_spread, spread);
    c.require(spread <= 1e-4, "flat profile spread " + fmt("%.2e", spread));
    for (double p : {1.5, 3.0, kInfinity}) {
      const MinimizerResult r = std::isinf(p) ? comass_minimizer(cls, m) : lp_minimizer(cls, p, m);
      c.require(norm_spread(m, r.form) <= 1e-4, "flat minimizer not constant at p=" + fmt("%g", p));
    }
  }

  double worst_gap = 0.0;
  for (const Mesh& m : curved) {
    const HomologyData hom = homology_basis(m);
    const CohomologyClass cls = make_class(hom, Eigen::Vector2d(1.0, -1.0));
    for (double p : {1.5, 3.0, 5.0}) {
      const MinimizerResult a = lp_minimizer(cls, p, m);
      SolverOptions o;
      o.initial_potential = testing::random_potential(rng, m.num_vertices(), 0.5);
      const MinimizerResult b = lp_minimizer(cls, p, m, o);
      const double gap = lp_of(m, a.form - b.form, p);
      worst_gap = std::max(worst_gap, gap);
      c.require(gap <= 1e-6, "initializations disagree by " + fmt("%.2e", gap));
    }
  }

  int cups = 0;
  std::vector<Mesh> tori = curved;
  tori.push_back(normalize_volume(flat_torus_mesh(hex, 8)));
  tori.push_back(flat_torus_mesh(square(), 8));
  for (const Mesh& m : tori) {
    const HomologyData hom = homology_basis(m);
    for (double p : {1.5, 2.0, 3.0}) {
      const CohomologyClass a = make_class(hom, Eigen::Vector2d(1, 0));
      const CohomologyClass b = make_class(hom, testing::random_vector(rng, 2, 2.0));
      const CupBoundReport r = cup_bound_check(a, b, p, m);
      ++cups;
      c.require(r.holds, "cup bound at p=" + fmt("%g", p));
    }
  }
  c.note("flat profile spread " + fmt("%.1e", flat_spread) + ", uniqueness gap " + fmt("%.1e", worst_gap) + ", " +
         std::to_string(cups) + " cup bounds");
}

void coarea(Checks& c) {
  const Mesh mesh = flat_torus_mesh(square(), 8);
  const HomologyData hom = homology_basis(mesh);
  Eigen::Matrix2d cover;
  cover << 2, 0, 0, 1;
  int expected = 1;
  for (const Eigen::MatrixXd& a : {Eigen::MatrixXd(Eigen::MatrixXd::Identity(2, 2)), Eigen::MatrixXd(cover)}) {
    const PLTorusMap map = linear_torus_map(mesh, hom, a, Eigen::MatrixXd::Identity(2, 2));
    const CoareaReport r = coarea_check(map, 10000);
    c.require(r.relative_error <= 0.01, "coarea error " + fmt("%.2e", r.relative_error));
    const DegreeReport d = degree(map, 16);
    c.require(d.degree == expected && d.signed_degree == expected, "degree " + std::to_string(d.degree));
    c.require(d.regular_values >= 10, "regular values " + std::to_string(d.regular_values));
    c.note("degree " + std::to_string(d.degree) + ": coarea error " + fmt("%.2e", r.relative_error) + " over " +
           std::to_string(d.regular_values) + " regular values");
    ++expected;
  }
}

// Reduced binary forms c^2 [[1, x], [x, y]], 0 <= x <= 1/2, 1 <= y: lambda_1 = c,
// covolume c^2 sqrt(y - x^2); critical exactly at x = 1/2, y = 1.
struct ReducedForm {
  double x, y, c;
  Lattice lattice() const {
    Eigen::Matrix2d g;
    g << 1, x, x, y;
    return Lattice::from_gram(c * c * g);
  }
  double covolume() const { return c * c * std::sqrt(y - x * x); }
  bool critical() const { return x == 0.5 && y == 1.0; }
};

void fixtures(Checks& c) {
  const std::vector<ReducedForm> forms{{0.5, 1.0, 1.0}, {0.5, 1.0, 0.7}, {0.0, 1.0, 1.0}, {0.25, 1.0, 1.3},
                                       {0.5, 1.2, 1.0}, {0.1, 1.5, 0.9}, {0.4, 1.05, 1.0}, {0.5, 1.0, 2.2},
                                       {0.3, 2.0, 1.1}, {0.45, 1.01, 0.8}};
  const std::vector<double> params{0.05, 0.2, 0.5, 0.69, 0.7, 0.9, 1.0, 1.1, 2.0, 5.0};
  VerifyOptions exact;
  exact.equality_tolerance = exact.slack_tolerance = exact.criticality_tolerance = 1e-12;
  const double gamma = 2.0 / std::sqrt(3.0);
  const auto t0 = Clock::now();
  int equalities = 0;
  for (const ReducedForm& f : forms)
    for (double t : params) {
      const InequalityReport r = verify(HeisenbergFixture{f.lattice(), t}, InequalityId::k11, exact);
      const double lhs = f.c * f.c * std::min(t, f.c);
      const double rhs = gamma * f.covolume() * t;
      const bool equality = f.critical() && t <= f.c;
      const std::string tag = "Heisenberg x=" + fmt("%g", f.x) + " y=" + fmt("%g", f.y) + " t=" + fmt("%g", t);
      c.require(std::abs(r.lhs - lhs) <= 1e-12 * rhs && std::abs(r.rhs - rhs) <= 1e-12 * rhs, tag + " sides");
      c.require(r.slack >= -1e-12 * rhs, tag + " violates 11");
      c.require(r.equality_flag == equality && (equality || r.slack > 1e-12 * rhs), tag + " equality set");
      equalities += equality;
    }
  for (const ReducedForm& f : forms)
    for (double v : params) {
      const InequalityReport r = verify(ProductFixture{f.lattice(), v}, InequalityId::kEq12, exact);
      const double rhs = gamma * f.covolume() * v;
      c.require(std::abs(r.lhs - v * f.c * f.c) <= 1e-12 * rhs && std::abs(r.rhs - rhs) <= 1e-12 * rhs, "product sides");
      c.require(r.slack >= -1e-12 * rhs, "product violates eq12");
      c.require(r.equality_flag == f.critical(), "product equality set");
    }
  const double t = seconds_since(t0);
  c.require(t <= 1.0, "fixture grid took " + fmt("%.3f s", t));
  c.note(std::to_string(equalities) + " Heisenberg equality cases, " + fmt("%.3f s", t));
}

void lattices(Checks& c) {
  testing::Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    const int b = 1 + i % 3;
    const Eigen::MatrixXd g = testing::random_gram(rng, b, 0.2);
    // Any minimal vector has |v_j| <= lambda sqrt(G^-1_jj), and lambda <= min sqrt(G_ii).
    const double lambda_bound = std::sqrt(g.diagonal().minCoeff());
    const int r = static_cast<int>(std::ceil(lambda_bound * std::sqrt(g.inverse().diagonal().maxCoeff())));
    const testing::BruteForceMinimum brute = testing::brute_force_shortest(g, r);
    const MinimalVectorSet m = shortest_vectors(Lattice::from_gram(g));
    c.require(std::abs(m.length - brute.length) <= 1e-9 * brute.length, "lattice " + std::to_string(i) + " lambda_1");
    c.require(m.vectors.size() == brute.vectors.size(), "lattice " + std::to_string(i) + " minimal vector count");
  }
  const Lattice a2 = Lattice::from_gram(testing::hexagonal_gram());
  const Lattice d4 = Lattice::from_gram(testing::d4_gram());
  c.require(std::abs(hermite_ratio(a2) - 2.0 / std::sqrt(3.0)) <= 1e-10, "A2 Hermite ratio");
  c.require(std::abs(hermite_ratio(d4) - 2.0) <= 1e-10, "D4 Hermite ratio");
  c.require(is_perfect(a2) && is_eutactic(a2), "A2 perfect and eutactic");
  c.require(is_perfect(d4) && is_eutactic(d4), "D4 perfect and eutactic");
  for (int b = 2; b <= 4; ++b)
    c.require(!is_perfect(Lattice::from_gram(Eigen::MatrixXd::Identity(b, b))), "Z^" + std::to_string(b) + " perfect");
}

struct Criterion {
  int number;
  const char* name;
  std::function<void(Checks&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "Loewner equality on the hexagonal torus", loewner},
      {2, "conformal invariance and the 10c equality flag", conformal_invariance},
      {3, "rank-1 decompositions of random polytope norms", rank1_suite},
      {4, "BI map volume bound and flat equality signature", bi_bound},
      {5, "Jensen chain and wedge energy bound", jensen_chain},
      {6, "L^p norm theory", lp_theory},
      {7, "coarea identity and degree", coarea},
      {8, "Heisenberg and product fixtures", fixtures},
      {9, "lattice suite", lattices},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0;
  for (const Criterion& cr : criteria) {
    if (!selected.empty() && !selected.count(cr.number)) continue;
    Checks checks;
    const auto t0 = Clock::now();
    try {
      cr.run(checks);
    } catch (const std::exception& e) {
      checks.require(false, std::string("exception: ") + e.what());
    }
    const bool ok = checks.passed();
    failed += !ok;
    std::printf("%s [%d] %s (%.1f s): %s\n", ok ? "PASS" : "FAIL", cr.number, cr.name, seconds_since(t0),
                checks.summary().c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
