#include "systola/io.hpp"

#include <fstream>
#include <sstream>

#include "systola/error.hpp"

namespace systola::io {
namespace {

std::string edge_key(int a, int b) { return std::to_string(a) + "-" + std::to_string(b); }

std::pair<int, int> parse_edge_key(const std::string& key) {
  const auto dash = key.find('-');
  if (dash == std::string::npos || dash == 0 || dash + 1 == key.size())
    fail(ErrorKind::kInvalidInput, "bad edge key '" + key + "'");
  try {
    return {std::stoi(key.substr(0, dash)), std::stoi(key.substr(dash + 1))};
  } catch (const std::exception&) {
    fail(ErrorKind::kInvalidInput, "bad edge key '" + key + "'");
  }
}

template <typename F>
auto guarded(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidInput, std::string("malformed ") + what + " JSON: " + e.what());
  }
}

}  // namespace

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kInvalidInput, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidInput, "cannot parse " + path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kInvalidInput, "cannot write " + path);
  out << j.dump(2) << "\n";
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  return guarded("matrix", [&] {
    if (!j.is_array() || j.empty()) fail(ErrorKind::kInvalidInput, "matrix must be a non-empty array of rows");
    const int r = static_cast<int>(j.size());
    const int c = static_cast<int>(j.at(0).size());
    Eigen::MatrixXd m(r, c);
    for (int i = 0; i < r; ++i) {
      if (!j[i].is_array() || static_cast<int>(j[i].size()) != c)
        fail(ErrorKind::kInvalidInput, "matrix rows have unequal length");
      for (int k = 0; k < c; ++k) m(i, k) = j[i][k].get<double>();
    }
    return m;
  });
}

Json vector_to_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd vector_from_json(const Json& j) {
  return guarded("vector", [&] {
    if (!j.is_array()) fail(ErrorKind::kInvalidInput, "vector must be an array");
    Eigen::VectorXd v(static_cast<int>(j.size()));
    for (int i = 0; i < v.size(); ++i) v(i) = j[i].get<double>();
    return v;
  });
}

Lattice lattice_from_json(const Json& j) {
  return guarded("lattice", [&] {
    if (!j.contains("gram")) fail(ErrorKind::kInvalidInput, "lattice JSON needs \"gram\"");
    return Lattice::from_gram(matrix_from_json(j.at("gram")));
  });
}

Json lattice_to_json(const Lattice& lattice) { return Json{{"gram", matrix_to_json(lattice.gram())}}; }

NormBody norm_from_json(const Json& j) {
  return guarded("norm", [&] {
    const std::string kind = j.at("kind").get<std::string>();
    const int dim = j.at("dim").get<int>();
    const Json& data = j.at("data");
    NormBody body = [&] {
      if (kind == "polytope") return NormBody::polytope(matrix_from_json(data).transpose());
      if (kind == "facets") return NormBody::facets(matrix_from_json(data).transpose());
      if (kind == "ellipsoid") return NormBody::ellipsoid(matrix_from_json(data));
      if (kind == "samples")
        return NormBody::samples(matrix_from_json(data.at("directions")).transpose(),
                                 vector_from_json(data.at("values")));
      fail(ErrorKind::kInvalidNorm, "unknown norm kind '" + kind + "'");
    }();
    if (body.dim() != dim) fail(ErrorKind::kInvalidNorm, "declared dim does not match data");
    return body;
  });
}

Json norm_to_json(const NormBody& norm) {
  Json j{{"dim", norm.dim()}, {"kind", to_string(norm.kind())}};
  switch (norm.kind()) {
    case NormKind::kEllipsoid: j["data"] = matrix_to_json(norm.quadratic_form()); break;
    case NormKind::kFacets: j["data"] = matrix_to_json(norm.facet_normals().transpose()); break;
    case NormKind::kPolytope:
    case NormKind::kSamples:
      j["kind"] = "polytope";
      j["data"] = matrix_to_json(norm.vertices().transpose());
      break;
  }
  return j;
}

Json ellipsoid_to_json(const Ellipsoid& e) {
  return Json{{"quadratic_form", matrix_to_json(e.quadratic_form)}, {"volume_ratio", e.volume_ratio()}};
}

Json decomposition_to_json(const Rank1Decomposition& d) {
  Json f = Json::array();
  for (const auto& l : d.functionals) f.push_back(vector_to_json(l));
  double sum = 0.0;
  for (double w : d.weights) sum += w;
  return Json{{"count", d.count()}, {"weights", d.weights}, {"functionals", f},
              {"weight_sum", sum}, {"reduced", d.reduced}};
}

Mesh mesh_from_json(const Json& j) {
  return guarded("mesh", [&] {
    const int dim = j.at("dim").get<int>();
    if (j.contains("complex")) {
      const Json& c = j.at("complex");
      const int nv = c.at("num_vertices").get<int>();
      std::vector<std::array<int, 2>> edges;
      for (const auto& e : c.at("edges")) edges.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
      std::vector<double> lengths = c.at("lengths").get<std::vector<double>>();
      std::vector<MeshTriangle> tris;
      for (const auto& t : c.at("triangles")) {
        MeshTriangle tr;
        tr.vertices = t.at("v").get<std::array<int, 3>>();
        tr.edges = t.at("e").get<std::array<int, 3>>();
        tr.signs = t.at("s").get<std::array<int, 3>>();
        tris.push_back(tr);
      }
      std::vector<MeshTetrahedron> tets;
      if (c.contains("tetrahedra"))
        for (const auto& t : c.at("tetrahedra")) {
          MeshTetrahedron te;
          te.vertices = t.at("v").get<std::array<int, 4>>();
          te.edges = t.at("e").get<std::array<int, 6>>();
          te.signs = t.at("s").get<std::array<int, 6>>();
          te.faces = t.at("f").get<std::array<int, 4>>();
          te.face_signs = t.at("fs").get<std::array<int, 4>>();
          tets.push_back(te);
        }
      Mesh mesh(dim, nv, std::move(edges), std::move(lengths), std::move(tris), std::move(tets));
      if (c.contains("coordinates")) mesh.set_vertex_coordinates(matrix_from_json(c.at("coordinates")));
      if (c.contains("displacements")) mesh.set_edge_displacements(matrix_from_json(c.at("displacements")));
      return mesh;
    }
    std::vector<std::vector<int>> simplices = j.at("simplices").get<std::vector<std::vector<int>>>();
    std::map<std::pair<int, int>, double> lengths;
    for (const auto& [key, value] : j.at("edge_lengths").items()) lengths[parse_edge_key(key)] = value.get<double>();
    return Mesh::from_simplices(dim, simplices, lengths);
  });
}

Json mesh_to_json(const Mesh& mesh) {
  Json j{{"dim", mesh.dim()}};
  if (mesh.is_simplicial()) {
    Json simplices = Json::array();
    for (int s = 0; s < mesh.num_top(); ++s) simplices.push_back(mesh.top(s).vertices);
    Json lengths = Json::object();
    for (int e = 0; e < mesh.num_edges(); ++e) {
      const auto& ed = mesh.edges()[e];
      lengths[edge_key(std::min(ed[0], ed[1]), std::max(ed[0], ed[1]))] = mesh.edge_lengths()[e];
    }
    j["simplices"] = simplices;
    j["edge_lengths"] = lengths;
  }
  Json c{{"num_vertices", mesh.num_vertices()}};
  c["edges"] = mesh.edges();
  c["lengths"] = mesh.edge_lengths();
  Json tris = Json::array();
  for (const auto& t : mesh.triangles()) tris.push_back(Json{{"v", t.vertices}, {"e", t.edges}, {"s", t.signs}});
  c["triangles"] = tris;
  if (mesh.dim() == 3) {
    Json tets = Json::array();
    for (const auto& t : mesh.tetrahedra())
      tets.push_back(Json{{"v", t.vertices}, {"e", t.edges}, {"s", t.signs}, {"f", t.faces}, {"fs", t.face_signs}});
    c["tetrahedra"] = tets;
  }
  if (mesh.vertex_coordinates()) c["coordinates"] = matrix_to_json(*mesh.vertex_coordinates());
  if (mesh.edge_displacements()) c["displacements"] = matrix_to_json(*mesh.edge_displacements());
  j["complex"] = c;
  return j;
}

Json form_to_json(const Mesh& mesh, const Form& form) {
  Json j{{"values", std::vector<double>(form.data(), form.data() + form.size())}};
  if (mesh.is_simplicial()) {
    Json map = Json::object();
    for (int e = 0; e < mesh.num_edges(); ++e) map[edge_key(mesh.edges()[e][0], mesh.edges()[e][1])] = form(e);
    j["edge_map"] = map;
  }
  return j;
}

Form form_from_json(const Mesh& mesh, const Json& j) {
  return guarded("form", [&] {
    if (j.contains("values")) {
      Form f = vector_from_json(j.at("values"));
      if (f.size() != mesh.num_edges()) fail(ErrorKind::kInvalidForm, "form has wrong number of values");
      return f;
    }
    std::map<std::pair<int, int>, int> index;
    for (int e = 0; e < mesh.num_edges(); ++e) index[{mesh.edges()[e][0], mesh.edges()[e][1]}] = e;
    Form f = Form::Zero(mesh.num_edges());
    std::vector<char> set(mesh.num_edges(), 0);
    for (const auto& [key, value] : j.at("edge_map").items()) {
      const auto [a, b] = parse_edge_key(key);
      auto it = index.find({a, b});
      double sign = 1.0;
      if (it == index.end()) {
        it = index.find({b, a});
        sign = -1.0;
      }
      if (it == index.end()) fail(ErrorKind::kInvalidForm, "form references unknown edge " + key);
      f(it->second) = sign * value.get<double>();
      set[it->second] = 1;
    }
    for (char s : set)
      if (!s) fail(ErrorKind::kInvalidForm, "form is missing edge values");
    return f;
  });
}

}  // namespace systola::io
