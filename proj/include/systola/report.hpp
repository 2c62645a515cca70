#pragma once

#include <string>

#include "systola/abel_jacobi.hpp"
#include "systola/cohomology.hpp"
#include "systola/error.hpp"
#include "systola/io.hpp"
#include "systola/systolic.hpp"

namespace systola::io {

inline constexpr const char* kReportSchemaVersion = "1.0.0";

// InequalityReport as described by schema/report.schema.json.
Json report_to_json(const InequalityReport& report);

// Structured failure record naming the cell that failed.
Json error_to_json(const Error& error, const std::string& cell);

Json minimizer_to_json(const Mesh& mesh, const MinimizerResult& r, double p);
Json profile_to_json(const NormProfile& profile);
Json cup_bound_to_json(const CupBoundReport& r);

Json torus_map_to_json(const PLTorusMap& map);
Json jacobian_to_json(const JacobianField& field);
Json chain_to_json(const JensenChainReport& report);
Json coarea_to_json(const CoareaReport& report);
Json degree_to_json(const DegreeReport& report);

}  // namespace systola::io
