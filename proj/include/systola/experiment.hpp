#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "systola/error.hpp"
#include "systola/io.hpp"
#include "systola/systolic.hpp"

namespace systola {

enum class SourceKind { kFlatTorus, kConformalBump, kStretchBump, kRandomPerturbation, kMeshFile, kHeisenberg, kProduct };

const char* to_string(SourceKind kind);

struct SourceSpec {
  SourceKind kind = SourceKind::kFlatTorus;
  std::string name;
  Eigen::MatrixXd gram;           // generated tori and fixtures
  std::string mesh_file;          // kMeshFile
  double amplitude = 0.3;         // perturbations
  std::optional<unsigned long long> seed;
  std::vector<double> fibers;     // fixtures: fiber length (Heisenberg) or volume (product)
  int fiber_dim = 2;
  std::vector<InequalityId> inequalities;  // overrides the experiment list when non-empty
};

struct ExperimentConfig {
  std::vector<SourceSpec> sources;
  std::vector<InequalityId> inequalities;
  std::vector<double> exponents;  // p values for 23; empty means max(b, 2)
  std::vector<int> refinements;
  VerifyOptions verify;
  std::string reports_path;  // JSON lines; empty writes to stdout
  std::string summary_path;  // CSV; empty skips it
  unsigned long long seed = 0;
};

// Reads "tolerances", "body_samples" and "diagnostics" from a config object.
void apply_verify_settings(const io::Json& j, VerifyOptions& options);

// Throws kInvalidInput on anything malformed: unknown keys, missing files,
// non-positive tolerances, empty inequality or refinement lists.
ExperimentConfig parse_experiment_config(const io::Json& j);
ExperimentConfig load_experiment_config(const std::string& path);

struct Cell {
  int source = 0;
  InequalityId id = InequalityId::k10;
  std::optional<double> p;
  int refinement = 0;
  std::optional<double> fiber;
};

std::vector<Cell> expand_cells(const ExperimentConfig& config);
std::string cell_label(const ExperimentConfig& config, const Cell& cell);

struct CellOutcome {
  Cell cell;
  std::optional<InequalityReport> report;
  std::optional<Error> error;
};

struct ExperimentResult {
  std::vector<CellOutcome> outcomes;  // config order
  int exit_code = 0;
};

// 0 ok, 1 slack failure, 2 input error, 3 solver failure.
int exit_code_for(const Error& error);

// Worker count: hardware concurrency capped by SYSTOLA_THREADS.
int worker_count(std::size_t cells);

InequalityReport run_cell(const ExperimentConfig& config, const Cell& cell);
ExperimentResult run_experiment(const ExperimentConfig& config);

void write_reports(std::ostream& out, const ExperimentConfig& config, const ExperimentResult& result);
void write_summary(std::ostream& out, const ExperimentConfig& config, const ExperimentResult& result);
// Writes to the configured paths (reports to `fallback` when no path is set).
void write_outputs(const ExperimentConfig& config, const ExperimentResult& result, std::ostream& fallback);

}  // namespace systola
