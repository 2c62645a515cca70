#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

namespace systola {

enum class NormKind { kPolytope, kFacets, kEllipsoid, kSamples };
const char* to_string(NormKind kind);

// A symmetric norm on R^b. Representations:
//  - polytope:  unit ball = conv of a vertex list closed under negation
//  - facets:    unit ball = { x : |<a_j, x>| <= 1 }, i.e. norm = max_j |<a_j, x>|
//  - ellipsoid: norm^2 = x'Qx
//  - samples:   norm values on a symmetric direction set; the unit ball is the
//               convex hull of the rescaled sample points
class NormBody {
 public:
  static NormBody polytope(const Eigen::MatrixXd& vertices);  // columns
  static NormBody facets(const Eigen::MatrixXd& normals);     // columns
  static NormBody ellipsoid(const Eigen::MatrixXd& q);
  static NormBody samples(const Eigen::MatrixXd& directions, const Eigen::VectorXd& values);

  int dim() const { return dim_; }
  NormKind kind() const { return kind_; }

  double norm(const Eigen::VectorXd& x) const;
  // sup { <l, x> : norm(x) <= 1 }; zero for the zero functional.
  double dual_norm(const Eigen::VectorXd& l) const;

  // Vertices of the unit ball (polytope/samples kinds).
  const Eigen::MatrixXd& vertices() const { return vertices_; }
  // Facet normals, one per +- pair (facets kind, or computed for polytopes).
  Eigen::MatrixXd facet_normals() const;
  const Eigen::MatrixXd& quadratic_form() const { return q_; }

  // Samples kind: largest relative shortfall of a sample point inside the hull
  // (nonzero when the sampled values are not those of a convex body).
  double discretization_error() const { return discretization_error_; }

 private:
  NormBody() = default;

  NormKind kind_ = NormKind::kEllipsoid;
  int dim_ = 0;
  Eigen::MatrixXd vertices_;
  Eigen::MatrixXd normals_;
  Eigen::MatrixXd q_;
  double discretization_error_ = 0.0;
};

// Facets of a centrally symmetric polytope by enumeration of b-subsets of
// vertices. Suitable for modest vertex counts; one normal per +- pair.
Eigen::MatrixXd polytope_facets(const Eigen::MatrixXd& vertices);

// { x : x'Qx <= 1 }.
struct Ellipsoid {
  Eigen::MatrixXd quadratic_form;
  double norm(const Eigen::VectorXd& x) const { return std::sqrt(x.dot(quadratic_form * x)); }
  // Volume relative to the unit Euclidean ball.
  double volume_ratio() const { return 1.0 / std::sqrt(quadratic_form.determinant()); }
};

struct JohnOptions {
  double gap_tolerance = 1e-13;  // duality gap on log det
  int max_newton_steps = 200;
};

struct JohnResult {
  Ellipsoid ellipsoid;
  double duality_gap = 0.0;
  int contact_count = 0;
  int iterations = 0;
};

// Maximum-volume ellipsoid inscribed in the unit ball of `norm`.
JohnResult john_ellipsoid_certified(const NormBody& norm, const JohnOptions& options = {});
Ellipsoid john_ellipsoid(const NormBody& norm);

// ||.||_E^2 = sum_i weights_i * <functionals_i, .>^2.
struct Rank1Decomposition {
  std::vector<double> weights;
  std::vector<Eigen::VectorXd> functionals;
  bool reduced = true;  // false when the count stayed at b(b+1)/2 + 1
  std::size_t count() const { return weights.size(); }
  Eigen::MatrixXd reconstruct() const;
};

Rank1Decomposition rank1_decomposition(const NormBody& norm, const Ellipsoid& ellipsoid);

// x -> (sqrt(w_1) L_1(x), ..., sqrt(w_N) L_N(x)).
class IsometryEmbedding {
 public:
  explicit IsometryEmbedding(const Rank1Decomposition& decomp);
  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const { return matrix_ * x; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  // Left inverse composed with orthogonal projection onto the image.
  Eigen::MatrixXd projection_inverse() const;

 private:
  Eigen::MatrixXd matrix_;
};

IsometryEmbedding isometry_embedding(const Rank1Decomposition& decomp);

}  // namespace systola
