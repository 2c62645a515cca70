#include "systola/fixtures.hpp"

#include <cmath>
#include <string>

#include "systola/error.hpp"

namespace systola {
namespace {

double lambda1(const Lattice& l) { return shortest_vectors(l).length; }

void criticality(InequalityReport& r, const Lattice& l, const VerifyOptions& o) {
  const double crit = std::abs(hermite_ratio(l) / hermite_catalog_constant(l.dim()) - 1.0);
  r.diagnostics["john_lattice_criticality"] = {crit, o.criticality_tolerance, crit <= o.criticality_tolerance};
}

}  // namespace

HeisenbergQuantities heisenberg_quantities(const HeisenbergFixture& fx) {
  if (fx.base.dim() != 2) fail(ErrorKind::kUnsupportedDimension, "Heisenberg base is a 2-torus");
  if (!(fx.fiber_length > 0) || !std::isfinite(fx.fiber_length))
    fail(ErrorKind::kInvalidInput, "fiber length must be positive");
  HeisenbergQuantities q;
  q.stsys1 = lambda1(fx.base);
  q.pisys1 = std::min(fx.fiber_length, q.stsys1);
  q.vol = fx.base.covolume() * fx.fiber_length;
  q.deg = fx.fiber_length;
  q.lhs11 = q.stsys1 * q.stsys1 * q.pisys1;
  q.rhs11 = hermite_catalog_constant(2) * q.vol;
  return q;
}

ProductQuantities product_quantities(const ProductFixture& fx) {
  if (!(fx.fiber_volume > 0) || !std::isfinite(fx.fiber_volume))
    fail(ErrorKind::kInvalidInput, "fiber volume must be positive");
  if (fx.fiber_dim < 2) fail(ErrorKind::kInvalidInput, "a fiber with b_1 = 0 has dimension at least 2");
  ProductQuantities q;
  q.b = fx.base.dim();
  q.n = q.b + fx.fiber_dim;
  const double gamma = hermite_catalog_constant(q.b);
  q.stsys1 = lambda1(fx.base);
  q.vol = fx.base.covolume() * fx.fiber_volume;
  q.deg = fx.fiber_volume;
  // Harmonic forms are parallel, so ||h||_p = |h| vol^{-1/p} for every p.
  q.confsys1 = q.stsys1 / std::pow(q.vol, 1.0 / q.n);
  q.lhs12 = q.deg * std::pow(q.stsys1, q.b);
  q.rhs12 = gamma * q.vol;
  // Scale lengths by c = vol^{-1/n}: systole c lambda_1, fiber volume c^f v.
  const double c = std::pow(q.vol, -1.0 / q.n);
  q.lhs23 = std::pow(c, fx.fiber_dim) * fx.fiber_volume * std::pow(c * q.stsys1, q.b);
  q.rhs23 = gamma;
  return q;
}

InequalityReport verify(const HeisenbergFixture& fx, InequalityId id, const VerifyOptions& options) {
  if (id != InequalityId::k11)
    fail(ErrorKind::kPrecondition, std::string("Heisenberg fixtures verify inequality 11, not ") + to_string(id));
  const HeisenbergQuantities q = heisenberg_quantities(fx);
  InequalityReport r;
  r.id = id;
  r.lhs = q.lhs11;
  r.rhs = q.rhs11;
  r.quantities = {{"n", 3},        {"b", 2},         {"stsys", q.stsys1},        {"pisys", q.pisys1},
                  {"vol", q.vol},  {"deg", q.deg},   {"gamma_term", hermite_catalog_constant(2)},
                  {"fiber_length", fx.fiber_length}};
  r.notes["deg"] = "upper bound";
  criticality(r, fx.base, options);
  const double fit = fx.fiber_length / q.stsys1;
  r.diagnostics["fiber_within_systole"] = {fit, 1.0, fit <= 1.0 + 1e-12};
  finalize_report(r, options);
  return r;
}

InequalityReport verify(const ProductFixture& fx, InequalityId id, const VerifyOptions& options) {
  const ProductQuantities q = product_quantities(fx);
  InequalityReport r;
  r.id = id;
  const double gamma = hermite_catalog_constant(q.b);
  r.quantities = {{"n", q.n},     {"b", q.b},     {"stsys", q.stsys1}, {"confsys", q.confsys1},
                  {"vol", q.vol}, {"deg", q.deg}, {"gamma_term", gamma}};
  switch (id) {
    case InequalityId::kEq12:
      r.lhs = q.lhs12;
      r.rhs = q.rhs12;
      break;
    case InequalityId::k23: {
      const double p = options.p.value_or(std::max(q.b, 2));
      if (p < std::max(q.b, 2)) fail(ErrorKind::kPrecondition, "hypothesis failed: p >= max(b, 2)");
      r.provenance.p = p;
      r.lhs = q.lhs23;
      r.rhs = q.rhs23;
      r.notes["volume"] = "evaluated after scaling to unit volume";
      break;
    }
    case InequalityId::k23c:
      r.provenance.p = q.n;
      r.lhs = q.deg * std::pow(q.confsys1, q.b);
      r.rhs = gamma * std::pow(q.vol, q.n - q.b);
      r.quantities["lhs_unit_volume"] = q.lhs23;
      r.quantities["rhs_unit_volume"] = q.rhs23;
      if (std::abs(r.rhs - gamma) > 1e-12 * gamma) r.notes["exponent"] = "vol^(n-b) differs from the unit-volume form";
      break;
    default:
      fail(ErrorKind::kPrecondition, std::string("product fixtures verify eq12, 23 and 23c, not ") + to_string(id));
  }
  criticality(r, fx.base, options);
  finalize_report(r, options);
  return r;
}

}  // namespace systola
