#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "systola/abel_jacobi.hpp"
#include "systola/experiment.hpp"
#include "systola/fixtures.hpp"
#include "systola/report.hpp"

using namespace systola;
using io::Json;

namespace {

double parse_p(const std::string& s) {
  if (s == "inf" || s == "infinity") return kInfinity;
  try {
    std::size_t used = 0;
    const double p = std::stod(s, &used);
    if (used == s.size()) return p;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::kInvalidInput, "bad exponent '" + s + "'");
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');) parts.push_back(item);
  return parts;
}

Eigen::VectorXd parse_class(const std::string& s) {
  const std::vector<std::string> parts = split(s);
  Eigen::VectorXd v(parts.size());
  for (std::size_t i = 0; i < parts.size(); ++i) {
    try {
      v(i) = std::stod(parts[i]);
    } catch (const std::exception&) {
      fail(ErrorKind::kInvalidInput, "bad class coefficient '" + parts[i] + "'");
    }
  }
  return v;
}

Json exponent_json(double p) { return std::isinf(p) ? Json("inf") : Json(p); }

void emit(const Json& j, const std::string& path) {
  if (path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    io::write_json_file(path, j);
  }
}

Mesh load_mesh(const std::string& path, bool normalize) {
  Mesh mesh = io::mesh_from_json(io::read_json_file(path));
  return normalize ? normalize_volume(mesh) : mesh;
}

struct Settings {
  std::string config;
  std::optional<unsigned long long> seed;
};

VerifyOptions verify_options(const Settings& s) {
  VerifyOptions o;
  if (!s.config.empty()) apply_verify_settings(io::read_json_file(s.config), o);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"systola: systolic inequalities on triangulated tori"};
  Settings settings;
  app.add_option("--config", settings.config, "JSON configuration");
  app.add_option("--seed", settings.seed, "random seed");
  app.require_subcommand(1);

  std::string gram_file, in_file, mesh_file, out_file, op, p_text, class_text, ps_text = "2,3,4,6,8", make = "flat-torus",
                                                                                  ineq, kind, map_kind = "harmonic";
  int refine = 8, samples = 10000, fiber_dim = 2;
  double amplitude = 0.3, fiber = 1.0;
  bool normalize = false;

  CLI::App* lattice = app.add_subcommand("lattice", "lattice invariants")->fallthrough();
  lattice->add_option("--gram", gram_file, "lattice JSON")->required();
  lattice->add_option("--op", op)->required()->check(CLI::IsMember({"lambda1", "ratio", "perfect", "eutactic"}));

  CLI::App* norm = app.add_subcommand("norm", "John ellipsoid and rank-1 decomposition")->fallthrough();
  norm->add_option("--in", in_file, "norm JSON")->required();
  norm->add_option("--op", op)->required()->check(CLI::IsMember({"john", "decompose"}));

  CLI::App* mesh = app.add_subcommand("mesh", "torus meshes")->fallthrough();
  mesh->add_option("--make", make)->check(CLI::IsMember({"flat-torus", "conformal-bump", "stretch-bump", "random-perturbation"}));
  mesh->add_option("--gram", gram_file, "lattice JSON")->required();
  mesh->add_option("--refine", refine)->check(CLI::PositiveNumber);
  mesh->add_option("--amplitude", amplitude);
  mesh->add_option("--out", out_file);

  CLI::App* forms = app.add_subcommand("forms", "L^p minimizers and norms of cohomology classes")->fallthrough();
  forms->add_option("--mesh", mesh_file)->required();
  forms->add_option("--class", class_text, "coefficients in the cohomology basis, comma separated")->required();
  forms->add_option("--p", p_text, "exponent or inf");
  forms->add_option("--ps", ps_text, "exponents for the profile");
  forms->add_option("--op", op)->required()->check(CLI::IsMember({"min", "harmonic", "norm", "profile"}));
  forms->add_flag("--normalize", normalize, "scale the mesh to unit volume");

  CLI::App* aj = app.add_subcommand("aj", "Abel-Jacobi and BI maps")->fallthrough();
  aj->add_option("--mesh", mesh_file)->required();
  aj->add_option("--op", op)->required()->check(CLI::IsMember({"build", "jacobian", "coarea", "degree", "chain"}));
  aj->add_option("--p", p_text, "exponent of the BI map, default max(b, 2)");
  aj->add_option("--map", map_kind, "map for jacobian, coarea and degree")->check(CLI::IsMember({"harmonic", "bi"}));
  aj->add_option("--samples", samples)->check(CLI::PositiveNumber);
  aj->add_flag("--normalize", normalize, "scale the mesh to unit volume");

  CLI::App* ver = app.add_subcommand("verify", "check one inequality on a mesh")->fallthrough();
  ver->add_option("--mesh", mesh_file)->required();
  ver->add_option("--ineq", ineq)->required();
  ver->add_option("--p", p_text);
  ver->add_option("--out", out_file);
  ver->add_flag("--normalize", normalize, "scale the mesh to unit volume");

  CLI::App* fix = app.add_subcommand("fixture", "closed-form Heisenberg and product fixtures")->fallthrough();
  fix->add_option("--kind", kind)->required()->check(CLI::IsMember({"heisenberg", "product"}));
  fix->add_option("--gram", gram_file, "base lattice JSON")->required();
  fix->add_option("--fiber", fiber, "fiber length (Heisenberg) or volume (product)");
  fix->add_option("--fiber-dim", fiber_dim);
  fix->add_option("--ineq", ineq)->required();
  fix->add_option("--p", p_text);

  CLI::App* sweep = app.add_subcommand("sweep", "run an experiment configuration")->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const std::optional<double> p = p_text.empty() ? std::nullopt : std::optional<double>(parse_p(p_text));

    if (*lattice) {
      const Lattice l = io::lattice_from_json(io::read_json_file(gram_file));
      Json j;
      if (op == "lambda1") {
        const MinimalVectorSet m = shortest_vectors(l);
        j = {{"lambda1", m.length}, {"minimal_vectors", m.vectors.size()}};
      } else if (op == "ratio") {
        j = {{"hermite_ratio", hermite_ratio(l)}};
        if (l.dim() <= 4) j["catalog"] = hermite_catalog_constant(l.dim());
      } else if (op == "perfect") {
        j = {{"perfect", is_perfect(l)}};
      } else {
        const EutaxyResult e = eutaxy(l);
        j = {{"eutactic", to_string(e.verdict)}, {"margin", e.margin}};
      }
      emit(j, "");
      return 0;
    }

    if (*norm) {
      const NormBody body = io::norm_from_json(io::read_json_file(in_file));
      const Ellipsoid john = john_ellipsoid(body);
      emit(op == "john" ? io::ellipsoid_to_json(john) : io::decomposition_to_json(rank1_decomposition(body, john)), "");
      return 0;
    }

    if (*mesh) {
      const Lattice l = io::lattice_from_json(io::read_json_file(gram_file));
      TorusMetric metric;
      if (make == "conformal-bump") metric = conformal_bump_metric(l.gram(), amplitude);
      if (make == "stretch-bump") metric = stretch_bump_metric(l.gram(), amplitude);
      if (make == "random-perturbation") metric = random_metric(l.gram(), amplitude, settings.seed.value_or(0));
      const Mesh m = metric ? torus_mesh(l, refine, metric) : flat_torus_mesh(l, refine);
      emit(io::mesh_to_json(m), out_file);
      return 0;
    }

    if (*forms) {
      const Mesh m = load_mesh(mesh_file, normalize);
      const HomologyData hom = homology_basis(m);
      const CohomologyClass cls = make_class(hom, parse_class(class_text));
      if (op == "harmonic") {
        emit(io::minimizer_to_json(m, harmonic_representative(cls, m), 2.0), "");
      } else if (op == "profile") {
        std::vector<double> ps;
        for (const std::string& s : split(ps_text)) ps.push_back(parse_p(s));
        emit(io::profile_to_json(norm_profile(cls, m, ps)), "");
      } else {
        if (!p) fail(ErrorKind::kInvalidInput, "--p is required for --op " + op);
        if (op == "norm") {
          emit(Json{{"p", exponent_json(*p)}, {"norm", cohomology_norm(cls, *p, m)}}, "");
        } else {
          const MinimizerResult r = std::isinf(*p) ? comass_minimizer(cls, m) : lp_minimizer(cls, *p, m);
          emit(io::minimizer_to_json(m, r, *p), "");
        }
      }
      return 0;
    }

    if (*aj) {
      const Mesh m = load_mesh(mesh_file, normalize);
      const HomologyData hom = homology_basis(m);
      const double exponent = p.value_or(std::max(hom.b1, 2));
      if (op == "chain") {
        const JensenChainReport r = jensen_chain_check(m, hom, exponent);
        emit(io::chain_to_json(r), "");
        return r.holds ? 0 : 1;
      }
      if (op == "build") {
        const BIConstruction bi = bi_construction(m, hom, exponent);
        emit(Json{{"p", exponent_json(exponent)},
                  {"decomposition", io::decomposition_to_json(bi.decomposition)},
                  {"minimizer_norms", bi.minimizer_norms},
                  {"minimizer_spreads", bi.minimizer_spreads},
                  {"map", io::torus_map_to_json(bi.map)}},
             "");
        return 0;
      }
      const PLTorusMap map = map_kind == "bi" ? bi_construction(m, hom, exponent).map : harmonic_abel_jacobi_map(m, hom);
      if (op == "jacobian") emit(io::jacobian_to_json(jacobian_field(map)), "");
      if (op == "coarea") emit(io::coarea_to_json(coarea_check(map, samples)), "");
      if (op == "degree") emit(io::degree_to_json(degree(map)), "");
      return 0;
    }

    if (*ver) {
      VerifyOptions o = verify_options(settings);
      o.p = p;
      o.source = mesh_file;
      const InequalityReport r = verify(load_mesh(mesh_file, normalize), parse_inequality(ineq), o);
      emit(io::report_to_json(r), out_file);
      return r.slack_ok ? 0 : 1;
    }

    if (*fix) {
      VerifyOptions o = verify_options(settings);
      o.p = p;
      o.source = kind;
      const Lattice l = io::lattice_from_json(io::read_json_file(gram_file));
      const InequalityId id = parse_inequality(ineq);
      const InequalityReport r =
          kind == "heisenberg" ? verify(HeisenbergFixture{l, fiber}, id, o) : verify(ProductFixture{l, fiber, fiber_dim}, id, o);
      emit(io::report_to_json(r), "");
      return r.slack_ok ? 0 : 1;
    }

    if (*sweep) {
      if (settings.config.empty()) fail(ErrorKind::kInvalidInput, "sweep needs --config FILE");
      ExperimentConfig config = load_experiment_config(settings.config);
      if (settings.seed) config.seed = *settings.seed;
      const ExperimentResult result = run_experiment(config);
      write_outputs(config, result, std::cout);
      return result.exit_code;
    }
  } catch (const Error& e) {
    std::cerr << io::error_to_json(e, command).dump() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << io::error_to_json(Error(ErrorKind::kInternal, e.what()), command).dump() << "\n";
    return 3;
  }
  return 2;
}
