#pragma once

#include <json.hpp>
#include <string>

#include "systola/lattice.hpp"
#include "systola/mesh.hpp"
#include "systola/normed_space.hpp"

namespace systola::io {

using Json = nlohmann::json;

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

// {"gram": [[...], ...]}
Lattice lattice_from_json(const Json& j);
Json lattice_to_json(const Lattice& lattice);

// {"dim": b, "kind": "polytope"|"facets"|"ellipsoid"|"samples", "data": ...}
NormBody norm_from_json(const Json& j);
Json norm_to_json(const NormBody& norm);
Json ellipsoid_to_json(const Ellipsoid& e);
Json decomposition_to_json(const Rank1Decomposition& d);

// Simplicial meshes use {"dim", "simplices", "edge_lengths": {"i-j": l}}. The
// "complex" member carries the full cell structure (edge order, loops,
// repeated edges) and takes precedence when present.
Mesh mesh_from_json(const Json& j);
Json mesh_to_json(const Mesh& mesh);

// {"values": [per edge], "edge_map": {"i-j": value}} (edge_map only for simplicial meshes).
Json form_to_json(const Mesh& mesh, const Form& form);
Form form_from_json(const Mesh& mesh, const Json& j);

Json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const Json& j);
Json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const Json& j);

}  // namespace systola::io
