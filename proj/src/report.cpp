#include "systola/report.hpp"

#include <cmath>

namespace systola::io {
namespace {

Json optional_number(const std::optional<double>& v) {
  if (!v) return nullptr;
  if (std::isinf(*v)) return "inf";
  return *v;
}

Json exponent(double p) { return std::isinf(p) ? Json("inf") : Json(p); }

}  // namespace

Json report_to_json(const InequalityReport& r) {
  Json diagnostics = Json::object();
  for (const auto& [name, d] : r.diagnostics)
    diagnostics[name] = {{"value", d.value}, {"threshold", d.threshold}, {"passed", d.passed}};
  Json quantities = Json::object();
  for (const auto& [name, v] : r.quantities) quantities[name] = v;
  Json notes = Json::object();
  for (const auto& [name, v] : r.notes) notes[name] = v;
  Json tolerances = Json::object();
  for (const auto& [name, v] : r.provenance.tolerances) tolerances[name] = v;
  return Json{
      {"schema_version", kReportSchemaVersion},
      {"inequality", to_string(r.id)},
      {"lhs", r.lhs},
      {"rhs", r.rhs},
      {"slack", r.slack},
      {"ratio", r.ratio},
      {"equality_flag", r.equality_flag},
      {"slack_ok", r.slack_ok},
      {"diagnostics", diagnostics},
      {"quantities", quantities},
      {"notes", notes},
      {"provenance",
       {{"source", r.provenance.source},
        {"refinement", r.provenance.refinement},
        {"p", optional_number(r.provenance.p)},
        {"tolerances", tolerances}}},
  };
}

Json error_to_json(const Error& error, const std::string& cell) {
  return Json{{"schema_version", kReportSchemaVersion},
              {"error", {{"kind", to_string(error.kind())}, {"message", error.what()}, {"cell", cell}}}};
}

Json minimizer_to_json(const Mesh& mesh, const MinimizerResult& r, double p) {
  return Json{{"p", exponent(p)},
              {"norm", r.norm},
              {"residual", r.residual},
              {"iterations", r.iterations},
              {"form", form_to_json(mesh, r.form)}};
}

Json profile_to_json(const NormProfile& profile) {
  Json ps = Json::array();
  for (double p : profile.p_values) ps.push_back(exponent(p));
  Json checks = Json::array();
  for (const ConstancyCheck& c : profile.constancy)
    checks.push_back({{"p", exponent(c.p)},
                      {"p_next", exponent(c.p_next)},
                      {"spread", c.spread},
                      {"coclosed_residual", c.coclosed_residual},
                      {"passed", c.passed}});
  return Json{{"p", ps}, {"norms", profile.norms}, {"monotone", profile.monotone}, {"constancy", checks}};
}

Json cup_bound_to_json(const CupBoundReport& r) {
  return Json{{"p", exponent(r.p)}, {"q", exponent(r.q)},           {"norm_alpha", r.norm_alpha}, {"norm_beta", r.norm_beta},
              {"lhs", r.lhs}, {"cup", r.cup},       {"constant", r.constant},     {"rhs", r.rhs},
              {"slack", r.slack}, {"holds", r.holds}};
}

Json torus_map_to_json(const PLTorusMap& map) {
  return Json{{"target_gram", matrix_to_json(map.target_gram)},
              {"period_matrix", matrix_to_json(map.period_matrix)},
              {"increments", matrix_to_json(map.increments)},
              {"vertex_values", matrix_to_json(map.vertex_values)}};
}

Json jacobian_to_json(const JacobianField& field) {
  return Json{{"integral", field.integral}, {"values", vector_to_json(field.values)}, {"signs", vector_to_json(field.signs)}};
}

Json chain_to_json(const JensenChainReport& report) {
  Json steps = Json::array();
  for (const ChainStep& s : report.steps)
    steps.push_back({{"name", s.name}, {"lhs", s.lhs}, {"rhs", s.rhs}, {"min_slack", s.min_slack}});
  return Json{{"p", report.p},
              {"integral_jacobian", report.integral_jacobian},
              {"tolerance", report.tolerance},
              {"holds", report.holds},
              {"steps", steps}};
}

Json coarea_to_json(const CoareaReport& r) {
  return Json{{"jacobian_integral", r.jacobian_integral},
              {"preimage_estimate", r.preimage_estimate},
              {"relative_error", r.relative_error},
              {"samples", r.samples},
              {"rejected", r.rejected}};
}

Json degree_to_json(const DegreeReport& r) {
  return Json{{"degree", r.degree}, {"signed_degree", r.signed_degree}, {"regular_values", r.regular_values}};
}

}  // namespace systola::io
