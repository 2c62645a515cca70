#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "systola/cohomology.hpp"
#include "systola/lattice.hpp"
#include "systola/mesh.hpp"

namespace systola {

// Shortest edge loop that is nonzero in H_1, by Dijkstra in the abelian
// cover. Torus meshes only (b_1 = dim, no torsion).
double pi_systole(const Mesh& mesh);
double pi_systole(const Mesh& mesh, const HomologyData& homology);

struct SystoleOptions {
  SolverOptions solver;
  std::size_t max_candidates = 1'000'000;
};

struct SystoleResult {
  double value = 0.0;
  std::vector<IntVector> minimizers;  // one per +- pair
  int evaluated = 0;                  // norm evaluations
  // |h|_p >= |h|_E / certified_factor for the harmonic Euclidean norm |.|_E.
  double certified_factor = 0.0;
};

// lambda_1 of H_1(X, Z) under ||.||_p; p = kInfinity gives the stable norm.
// Candidates come from Fincke-Pohst enumeration in the harmonic Euclidean norm,
// with a radius certified by the largest pointwise stretch of harmonic forms.
SystoleResult norm_systole(const Mesh& mesh, const HomologyData& homology, double p,
                           const SystoleOptions& options = {});

double stable_systole(const Mesh& mesh, const SystoleOptions& options = {});
// ||.||_dim; scale invariant, evaluated on a unit-volume copy.
double conformal_systole(const Mesh& mesh, const SystoleOptions& options = {});
// Unit-volume meshes only.
double lp_systole(const Mesh& mesh, double p, const SystoleOptions& options = {});

enum class InequalityId { k10, k10c, k23, k23c, k28, k11, kEq12 };

const char* to_string(InequalityId id);
InequalityId parse_inequality(const std::string& id);  // "10", "10c", ..., "eq12"
const std::vector<InequalityId>& all_inequalities();

struct Diagnostic {
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

struct Provenance {
  std::string source;
  int refinement = 0;
  std::optional<double> p;
  std::map<std::string, double> tolerances;
};

struct InequalityReport {
  InequalityId id = InequalityId::k10;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs - lhs
  double ratio = 0.0;  // lhs / rhs
  bool equality_flag = false;
  bool slack_ok = false;
  std::map<std::string, Diagnostic> diagnostics;
  std::map<std::string, double> quantities;
  std::map<std::string, std::string> notes;
  Provenance provenance;

  bool diagnostics_pass() const;
};

struct VerifyOptions {
  std::optional<double> p;            // (23); defaults to max(b, 2)
  double equality_tolerance = 0.02;   // flag when ratio > 1 - tolerance
  double slack_tolerance = 1e-6;      // relative to rhs
  double spread_tolerance = 0.05;
  double conformality_tolerance = 0.05;  // singular-value ratio <= 1 + tolerance
  double criticality_tolerance = 0.02;   // |hermite ratio / catalog - 1|
  int body_samples = 12;
  bool diagnostics = true;
  std::string source = "mesh";
  int refinement = 0;
  SystoleOptions systole;
};

// Ratios and slacks of one inequality on a mesh; (11) needs a fixture.
InequalityReport verify(const Mesh& mesh, InequalityId id, const VerifyOptions& options = {});

// Shared by the fixture verifiers: fills slack, ratio, flags and provenance.
void finalize_report(InequalityReport& report, const VerifyOptions& options);

}  // namespace systola
