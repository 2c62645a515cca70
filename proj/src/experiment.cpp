#include "systola/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include "systola/fixtures.hpp"
#include "systola/mesh.hpp"
#include "systola/report.hpp"

namespace systola {
namespace {

using io::Json;

const std::pair<SourceKind, const char*> kSourceNames[] = {
    {SourceKind::kFlatTorus, "flat-torus"},
    {SourceKind::kConformalBump, "conformal-bump"},
    {SourceKind::kStretchBump, "stretch-bump"},
    {SourceKind::kRandomPerturbation, "random-perturbation"},
    {SourceKind::kMeshFile, "mesh-file"},
    {SourceKind::kHeisenberg, "heisenberg"},
    {SourceKind::kProduct, "product"},
};

SourceKind parse_source_kind(const std::string& s) {
  for (const auto& [kind, name] : kSourceNames)
    if (s == name) return kind;
  fail(ErrorKind::kInvalidInput, "unknown source kind '" + s + "'");
}

bool generated(SourceKind k) {
  return k == SourceKind::kFlatTorus || k == SourceKind::kConformalBump || k == SourceKind::kStretchBump ||
         k == SourceKind::kRandomPerturbation;
}

bool fixture(SourceKind k) { return k == SourceKind::kHeisenberg || k == SourceKind::kProduct; }

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) fail(ErrorKind::kInvalidInput, where + " must be an object");
  for (const auto& item : j.items())
    if (!allowed.count(item.key())) fail(ErrorKind::kInvalidInput, "unknown key '" + item.key() + "' in " + where);
}

void require_file(const std::string& path) {
  if (!std::filesystem::is_regular_file(path)) fail(ErrorKind::kInvalidInput, "file not found: " + path);
}

double parse_exponent(const Json& j) {
  if (j.is_string() && (j.get<std::string>() == "inf" || j.get<std::string>() == "infinity")) return kInfinity;
  const double p = j.get<double>();
  if (!(p > 1.0)) fail(ErrorKind::kInvalidInput, "exponents must exceed 1");
  return p;
}

double positive(const Json& j, const std::string& what) {
  const double v = j.get<double>();
  if (!(v > 0.0) || !std::isfinite(v)) fail(ErrorKind::kInvalidInput, what + " must be positive");
  return v;
}

std::vector<InequalityId> parse_ids(const Json& j) {
  std::vector<InequalityId> ids;
  for (const Json& s : j) ids.push_back(parse_inequality(s.get<std::string>()));
  return ids;
}

SourceSpec parse_source(const Json& j, int index) {
  check_keys(j,
             {"kind", "name", "gram", "gram_file", "critical", "unit_covolume", "amplitude", "seed", "mesh", "fibers",
              "fiber_dim", "inequalities"},
             "source");
  SourceSpec s;
  s.kind = parse_source_kind(j.at("kind").get<std::string>());
  s.name = j.value("name", std::string(to_string(s.kind)) + "-" + std::to_string(index));
  if (s.kind == SourceKind::kMeshFile) {
    s.mesh_file = j.at("mesh").get<std::string>();
    require_file(s.mesh_file);
  } else {
    const int given = int(j.contains("gram")) + int(j.contains("gram_file")) + int(j.contains("critical"));
    if (given != 1) fail(ErrorKind::kInvalidInput, "source '" + s.name + "' needs one of gram, gram_file, critical");
    Lattice l = j.contains("critical") ? critical_lattice(j.at("critical").get<int>())
                : j.contains("gram")   ? Lattice::from_gram(io::matrix_from_json(j.at("gram")))
                                       : [&] {
                                           const std::string path = j.at("gram_file").get<std::string>();
                                           require_file(path);
                                           return io::lattice_from_json(io::read_json_file(path));
                                         }();
    if (j.value("unit_covolume", !fixture(s.kind))) l = l.scaled(std::pow(l.covolume(), -1.0 / l.dim()));
    s.gram = l.gram();
  }
  if (j.contains("amplitude")) {
    s.amplitude = j.at("amplitude").get<double>();
    if (!(std::abs(s.amplitude) < 1.0)) fail(ErrorKind::kInvalidInput, "amplitude must lie in (-1, 1)");
  }
  if (j.contains("seed")) s.seed = j.at("seed").get<unsigned long long>();
  if (fixture(s.kind)) {
    if (!j.contains("fibers") || j.at("fibers").empty())
      fail(ErrorKind::kInvalidInput, "fixture source '" + s.name + "' needs a non-empty fibers list");
    for (const Json& f : j.at("fibers")) s.fibers.push_back(positive(f, "fiber"));
    s.fiber_dim = j.value("fiber_dim", 2);
  }
  if (j.contains("inequalities")) s.inequalities = parse_ids(j.at("inequalities"));
  return s;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string format_p(const std::optional<double>& p) {
  if (!p) return "";
  return std::isinf(*p) ? "inf" : format_number(*p);
}

std::string source_label(const ExperimentConfig& config, const Cell& c) {
  std::string s = config.sources[c.source].name;
  if (c.fiber) s += "[fiber=" + format_short(*c.fiber) + "]";
  return s;
}

Mesh build_mesh(const ExperimentConfig& config, int index, int k) {
  const SourceSpec& s = config.sources[index];
  if (s.kind == SourceKind::kMeshFile) return normalize_volume(io::mesh_from_json(io::read_json_file(s.mesh_file)));
  const Lattice l = Lattice::from_gram(s.gram);
  switch (s.kind) {
    case SourceKind::kFlatTorus:
      return normalize_volume(flat_torus_mesh(l, k));
    case SourceKind::kConformalBump:
      return normalize_volume(torus_mesh(l, k, conformal_bump_metric(s.gram, s.amplitude)));
    case SourceKind::kStretchBump:
      return normalize_volume(torus_mesh(l, k, stretch_bump_metric(s.gram, s.amplitude)));
    case SourceKind::kRandomPerturbation: {
      const unsigned long long seed = s.seed.value_or(config.seed + static_cast<unsigned long long>(index));
      return normalize_volume(torus_mesh(l, k, random_metric(s.gram, s.amplitude, seed)));
    }
    default:
      fail(ErrorKind::kInternal, "not a mesh source");
  }
}

}  // namespace

const char* to_string(SourceKind kind) {
  for (const auto& [k, name] : kSourceNames)
    if (k == kind) return name;
  return "?";
}

void apply_verify_settings(const Json& j, VerifyOptions& o) {
  try {
    if (j.contains("tolerances")) {
      const Json& t = j.at("tolerances");
      check_keys(t, {"equality", "slack", "spread", "conformality", "criticality"}, "tolerances");
      if (t.contains("equality")) o.equality_tolerance = positive(t.at("equality"), "equality tolerance");
      if (t.contains("slack")) o.slack_tolerance = positive(t.at("slack"), "slack tolerance");
      if (t.contains("spread")) o.spread_tolerance = positive(t.at("spread"), "spread tolerance");
      if (t.contains("conformality")) o.conformality_tolerance = positive(t.at("conformality"), "conformality tolerance");
      if (t.contains("criticality")) o.criticality_tolerance = positive(t.at("criticality"), "criticality tolerance");
    }
    if (j.contains("body_samples")) {
      o.body_samples = j.at("body_samples").get<int>();
      if (o.body_samples < 4) fail(ErrorKind::kInvalidInput, "body_samples must be at least 4");
    }
    o.diagnostics = j.value("diagnostics", o.diagnostics);
  } catch (const io::Json::exception& e) {
    fail(ErrorKind::kInvalidInput, std::string("malformed settings: ") + e.what());
  }
}

ExperimentConfig parse_experiment_config(const Json& j) {
  try {
    check_keys(j,
               {"seed", "source", "sources", "inequalities", "exponents", "refinements", "tolerances", "body_samples",
                "diagnostics", "output"},
               "config");
    ExperimentConfig c;
    c.seed = j.value("seed", 0ULL);
    if (j.contains("source") == j.contains("sources"))
      fail(ErrorKind::kInvalidInput, "config needs exactly one of source, sources");
    if (j.contains("source")) {
      c.sources.push_back(parse_source(j.at("source"), 0));
    } else {
      int i = 0;
      for (const Json& s : j.at("sources")) c.sources.push_back(parse_source(s, i++));
    }
    if (c.sources.empty()) fail(ErrorKind::kInvalidInput, "no sources");
    if (!j.contains("inequalities")) fail(ErrorKind::kInvalidInput, "config needs an inequalities list");
    c.inequalities = parse_ids(j.at("inequalities"));
    if (c.inequalities.empty()) fail(ErrorKind::kInvalidInput, "inequality list is empty");
    if (j.contains("exponents"))
      for (const Json& p : j.at("exponents")) c.exponents.push_back(parse_exponent(p));
    if (j.contains("refinements"))
      for (const Json& k : j.at("refinements")) {
        const int v = k.get<int>();
        if (v < 1) fail(ErrorKind::kInvalidInput, "refinements must be positive");
        c.refinements.push_back(v);
      }
    const bool needs_k = std::any_of(c.sources.begin(), c.sources.end(), [](const SourceSpec& s) { return generated(s.kind); });
    if (needs_k && c.refinements.empty()) fail(ErrorKind::kInvalidInput, "generated meshes need a refinement list");
    apply_verify_settings(j, c.verify);
    if (j.contains("output")) {
      const Json& o = j.at("output");
      check_keys(o, {"reports", "summary"}, "output");
      c.reports_path = o.value("reports", std::string());
      c.summary_path = o.value("summary", std::string());
    }
    return c;
  } catch (const io::Json::exception& e) {
    fail(ErrorKind::kInvalidInput, std::string("malformed config: ") + e.what());
  }
}

ExperimentConfig load_experiment_config(const std::string& path) { return parse_experiment_config(io::read_json_file(path)); }

std::vector<Cell> expand_cells(const ExperimentConfig& config) {
  std::vector<Cell> cells;
  for (int i = 0; i < static_cast<int>(config.sources.size()); ++i) {
    const SourceSpec& s = config.sources[i];
    const std::vector<InequalityId>& ids = s.inequalities.empty() ? config.inequalities : s.inequalities;
    std::vector<int> ks = generated(s.kind) ? config.refinements : std::vector<int>{0};
    std::vector<std::optional<double>> fibers{std::nullopt};
    if (fixture(s.kind)) fibers.assign(s.fibers.begin(), s.fibers.end());
    for (int k : ks)
      for (const auto& fiber : fibers)
        for (InequalityId id : ids) {
          std::vector<std::optional<double>> ps{std::nullopt};
          if (id == InequalityId::k23 && !config.exponents.empty()) ps.assign(config.exponents.begin(), config.exponents.end());
          for (const auto& p : ps) cells.push_back({i, id, p, k, fiber});
        }
  }
  return cells;
}

std::string cell_label(const ExperimentConfig& config, const Cell& cell) {
  std::string s = "source=" + source_label(config, cell) + " ineq=" + to_string(cell.id);
  if (cell.p) s += " p=" + format_p(cell.p);
  s += " k=" + std::to_string(cell.refinement);
  return s;
}

int exit_code_for(const Error& error) { return error.is_solver_failure() ? 3 : 2; }

int worker_count(std::size_t cells) {
  int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("SYSTOLA_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || cap < 1) fail(ErrorKind::kInvalidInput, "SYSTOLA_THREADS must be a positive integer");
    n = std::min<long>(n, cap);
  }
  return std::max(1, std::min<int>(n, static_cast<int>(std::max<std::size_t>(cells, 1))));
}

InequalityReport run_cell(const ExperimentConfig& config, const Cell& cell) {
  const SourceSpec& s = config.sources[cell.source];
  VerifyOptions o = config.verify;
  o.p = cell.p;
  o.source = source_label(config, cell);
  o.refinement = cell.refinement;
  switch (s.kind) {
    case SourceKind::kHeisenberg:
      return verify(HeisenbergFixture{Lattice::from_gram(s.gram), *cell.fiber}, cell.id, o);
    case SourceKind::kProduct:
      return verify(ProductFixture{Lattice::from_gram(s.gram), *cell.fiber, s.fiber_dim}, cell.id, o);
    default:
      return verify(build_mesh(config, cell.source, cell.refinement), cell.id, o);
  }
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const std::vector<Cell> cells = expand_cells(config);
  ExperimentResult result;
  result.outcomes.resize(cells.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      CellOutcome& out = result.outcomes[i];
      out.cell = cells[i];
      try {
        out.report = run_cell(config, cells[i]);
      } catch (const Error& e) {
        out.error = e;
      } catch (const std::exception& e) {
        out.error = Error(ErrorKind::kInternal, e.what());
      }
    }
  };
  const int workers = worker_count(cells.size());
  std::vector<std::thread> pool;
  for (int t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (std::thread& t : pool) t.join();
  for (const CellOutcome& o : result.outcomes) {
    const int code = o.error ? exit_code_for(*o.error) : (o.report->slack_ok ? 0 : 1);
    result.exit_code = std::max(result.exit_code, code);
  }
  return result;
}

void write_reports(std::ostream& out, const ExperimentConfig& config, const ExperimentResult& result) {
  for (const CellOutcome& o : result.outcomes) {
    const Json j = o.error ? io::error_to_json(*o.error, cell_label(config, o.cell)) : io::report_to_json(*o.report);
    out << j.dump() << "\n";
  }
}

void write_summary(std::ostream& out, const ExperimentConfig& config, const ExperimentResult& result) {
  out << "source,inequality,p,refinement,lhs,rhs,slack,ratio,equality_flag,slack_ok,status\n";
  for (const CellOutcome& o : result.outcomes) {
    out << '"' << source_label(config, o.cell) << "\"," << to_string(o.cell.id) << ',';
    if (o.error) {
      out << format_p(o.cell.p) << ',' << o.cell.refinement << ",,,,,,," << to_string(o.error->kind()) << "\n";
      continue;
    }
    const InequalityReport& r = *o.report;
    out << format_p(r.provenance.p) << ',' << o.cell.refinement << ',' << format_number(r.lhs) << ','
        << format_number(r.rhs) << ',' << format_number(r.slack) << ',' << format_number(r.ratio) << ','
        << (r.equality_flag ? "true" : "false") << ',' << (r.slack_ok ? "true" : "false") << ','
        << (r.slack_ok ? "ok" : "slack-failure") << "\n";
  }
}

void write_outputs(const ExperimentConfig& config, const ExperimentResult& result, std::ostream& fallback) {
  if (config.reports_path.empty()) {
    write_reports(fallback, config, result);
  } else {
    std::ofstream out(config.reports_path);
    if (!out) fail(ErrorKind::kInvalidInput, "cannot write " + config.reports_path);
    write_reports(out, config, result);
  }
  if (!config.summary_path.empty()) {
    std::ofstream out(config.summary_path);
    if (!out) fail(ErrorKind::kInvalidInput, "cannot write " + config.summary_path);
    write_summary(out, config, result);
  }
}

}  // namespace systola
