#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "systola/lattice.hpp"

namespace systola {

// A closed oriented Delta-complex of dimension 2 or 3 with a piecewise-flat
// metric given by edge lengths. Loops and multiple edges are allowed, which is
// what coarse torus triangulations need; ordinary simplicial meshes are the
// special case without repetitions.
//
// Local pair order for the edges of a simplex with vertices v_0..v_n is
// lexicographic: (0,1), (0,2), ..., (n-1,n). A sign of +1 means the stored edge
// runs from v_i to v_j.
struct MeshTriangle {
  std::array<int, 3> vertices;
  std::array<int, 3> edges;  // (0,1), (0,2), (1,2)
  std::array<int, 3> signs;
};

struct MeshTetrahedron {
  std::array<int, 4> vertices;
  std::array<int, 6> edges;  // (0,1), (0,2), (0,3), (1,2), (1,3), (2,3)
  std::array<int, 6> signs;
  std::array<int, 4> faces;       // face i is opposite vertex i
  std::array<int, 4> face_signs;  // +1 when the stored triangle matches the induced order
};

struct TopSimplex {
  std::vector<int> vertices;
  std::vector<int> edges;
  std::vector<int> signs;
};

// Real 1-cochain: one value per oriented edge.
using Form = Eigen::VectorXd;

class Mesh {
 public:
  Mesh(int dim, int num_vertices, std::vector<std::array<int, 2>> edges, std::vector<double> lengths,
       std::vector<MeshTriangle> triangles, std::vector<MeshTetrahedron> tetrahedra = {});

  // Simplicial input: each simplex is an oriented vertex list; edges are
  // created with orientation low -> high index.
  static Mesh from_simplices(int dim, const std::vector<std::vector<int>>& simplices,
                             const std::map<std::pair<int, int>, double>& lengths);

  int dim() const { return dim_; }
  int num_vertices() const { return num_vertices_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_top() const { return static_cast<int>(tops_.size()); }
  const std::vector<std::array<int, 2>>& edges() const { return edges_; }
  const std::vector<double>& edge_lengths() const { return lengths_; }
  const std::vector<MeshTriangle>& triangles() const { return triangles_; }
  const std::vector<MeshTetrahedron>& tetrahedra() const { return tetrahedra_; }
  const TopSimplex& top(int s) const { return tops_[s]; }

  double volume() const { return volume_; }
  double top_volume(int s) const { return top_volumes_[s]; }
  const Eigen::VectorXd& top_volumes() const { return top_volumes_; }
  // Lower Cholesky factor of the Gram matrix of the edge vectors v_i - v_0.
  const Eigen::MatrixXd& top_frame(int s) const { return frames_[s]; }

  // True when no two simplices of any dimension share their vertex set.
  bool is_simplicial() const;
  int euler_characteristic() const;

  // Integer boundary matrix from k-chains to (k-1)-chains, k = 1..dim.
  Eigen::SparseMatrix<int> boundary(int k) const;

  // Optional per-vertex coordinates in [0,1)^b (set by the torus generators).
  const std::optional<Eigen::MatrixXd>& vertex_coordinates() const { return coords_; }
  void set_vertex_coordinates(Eigen::MatrixXd coords);
  // Optional lift displacement of every edge in lattice coordinates (b x E).
  const std::optional<Eigen::MatrixXd>& edge_displacements() const { return displacements_; }
  void set_edge_displacements(Eigen::MatrixXd displacements);

  Mesh with_edge_lengths(std::vector<double> lengths) const;
  Mesh scaled(double c) const;

 private:
  void validate_combinatorics() const;
  void build_geometry();

  int dim_;
  int num_vertices_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<double> lengths_;
  std::vector<MeshTriangle> triangles_;
  std::vector<MeshTetrahedron> tetrahedra_;
  std::vector<TopSimplex> tops_;
  std::vector<Eigen::MatrixXd> frames_;
  Eigen::VectorXd top_volumes_;
  double volume_ = 0.0;
  std::optional<Eigen::MatrixXd> coords_;
  std::optional<Eigen::MatrixXd> displacements_;
};

// Metric on the torus R^b / Z^b in lattice coordinates, as a function of the
// point in [0,1)^b. It must return a symmetric positive-definite b x b matrix.
using TorusMetric = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

// R^b/L with k^b cells, 2 triangles (b=2) or 6 tetrahedra (b=3) per cell.
Mesh flat_torus_mesh(const Lattice& lattice, int k);
// Same triangulation; each edge gets the length of its straight segment under
// `metric` evaluated at the edge midpoint (lattice coordinates scaled by 1/k).
Mesh torus_mesh(const Lattice& lattice, int k, const TorusMetric& metric);

// Perturbed flat metrics, all in lattice coordinates of `gram`.
// Conformal: (1 + a sin(2 pi x_0) sin(2 pi x_1))^2 gram, |a| < 1.
TorusMetric conformal_bump_metric(const Eigen::MatrixXd& gram, double amplitude);
// Not conformal: the first orthonormal frame direction is stretched by
// 1 + a sin(2 pi x_1), |a| < 1.
TorusMetric stretch_bump_metric(const Eigen::MatrixXd& gram, double amplitude);
// Smooth random metric U' exp(a S(x)) U with gram = U'U and S(x) a sum of three
// low-frequency Fourier modes with random symmetric unit-norm coefficients.
TorusMetric random_metric(const Eigen::MatrixXd& gram, double amplitude, unsigned long long seed);

Mesh conformal_scale(const Mesh& mesh, const Eigen::VectorXd& factors);
double volume(const Mesh& mesh);
Mesh normalize_volume(const Mesh& mesh);

// Frame coordinates of a closed 1-cochain on top simplex s; the Euclidean
// norm of the result is the pointwise norm.
Eigen::VectorXd local_covector(const Mesh& mesh, int s, const Form& form);
// One pointwise norm per top simplex.
Eigen::VectorXd pointwise_norms(const Mesh& mesh, const Form& form);
// Values of d(form) on triangles.
Eigen::VectorXd coboundary(const Mesh& mesh, const Form& form);
bool is_closed(const Mesh& mesh, const Form& form, double tolerance = 1e-10);
// Exact derivative of a vertex function.
Form vertex_gradient(const Mesh& mesh, const Eigen::VectorXd& f);

// Integral of a wedge b on a surface.
double wedge_integral(const Form& a, const Form& b, const Mesh& mesh);

using IntCochain = Eigen::Matrix<long long, Eigen::Dynamic, 1>;

struct HomologyData {
  int b1 = 0;
  std::vector<IntCochain> h1_basis;    // integer edge cycles
  std::vector<IntCochain> h1_cobasis;  // integer cocycles, <cobasis_i, basis_j> = delta_ij
  std::vector<long long> torsion;      // invariant factors > 1 of H_1
  std::vector<int> tree_parent_edge;   // spanning tree used for the cocycle normal form

  Eigen::MatrixXd pairing() const;
  Eigen::MatrixXd cobasis_matrix() const;  // edges x b1
};

HomologyData homology_basis(const Mesh& mesh);

// Nonzero invariant factors of an integer matrix (exact arithmetic).
std::vector<long long> invariant_factors(const std::vector<std::vector<long long>>& matrix);

// Coefficients of a closed cochain in the cobasis: its periods on the basis cycles.
Eigen::VectorXd periods(const HomologyData& homology, const Form& form);

}  // namespace systola
