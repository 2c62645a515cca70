#include "systola/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <string>

#include "systola/error.hpp"

namespace systola {
namespace {

constexpr double kDegenerateVolume = 1e-14;

const std::array<std::pair<int, int>, 3> kTrianglePairs = {{{0, 1}, {0, 2}, {1, 2}}};
const std::array<std::pair<int, int>, 6> kTetPairs = {{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

void check_edge_sign(const std::vector<std::array<int, 2>>& edges, int e, int sign, int a, int b,
                     const char* what) {
  if (e < 0 || e >= static_cast<int>(edges.size()))
    fail(ErrorKind::kInvalidMesh, std::string(what) + " references a missing edge");
  const auto& ed = edges[e];
  const bool ok = (sign == 1 && ed[0] == a && ed[1] == b) || (sign == -1 && ed[0] == b && ed[1] == a);
  if (!ok) fail(ErrorKind::kInvalidMesh, std::string(what) + " edge " + std::to_string(e) +
                                             " does not match its vertices");
}

// Parity of the permutation sorting `keys`.
template <typename T>
int sort_with_parity(std::vector<T>& keys) {
  int parity = 1;
  for (std::size_t i = 0; i < keys.size(); ++i)
    for (std::size_t j = 0; j + 1 < keys.size() - i; ++j)
      if (keys[j + 1] < keys[j]) {
        std::swap(keys[j], keys[j + 1]);
        parity = -parity;
      }
  return parity;
}

}  // namespace

Mesh::Mesh(int dim, int num_vertices, std::vector<std::array<int, 2>> edges, std::vector<double> lengths,
           std::vector<MeshTriangle> triangles, std::vector<MeshTetrahedron> tetrahedra)
    : dim_(dim),
      num_vertices_(num_vertices),
      edges_(std::move(edges)),
      lengths_(std::move(lengths)),
      triangles_(std::move(triangles)),
      tetrahedra_(std::move(tetrahedra)) {
  if (dim_ != 2 && dim_ != 3)
    fail(ErrorKind::kUnsupportedDimension, "meshes must have dimension 2 or 3, got " + std::to_string(dim_));
  if (num_vertices_ < 1) fail(ErrorKind::kInvalidMesh, "mesh has no vertices");
  if (lengths_.size() != edges_.size())
    fail(ErrorKind::kInvalidMesh, "edge length count does not match edge count");
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    for (int v : edges_[e])
      if (v < 0 || v >= num_vertices_) fail(ErrorKind::kInvalidMesh, "edge endpoint out of range");
    if (!(lengths_[e] > 0) || !std::isfinite(lengths_[e]))
      fail(ErrorKind::kInvalidMetric, "edge " + std::to_string(e) + " has non-positive length");
  }
  if (dim_ == 2 && !tetrahedra_.empty()) fail(ErrorKind::kInvalidMesh, "surface mesh with tetrahedra");
  if (dim_ == 3 && tetrahedra_.empty()) fail(ErrorKind::kInvalidMesh, "3-dimensional mesh without tetrahedra");
  if (triangles_.empty()) fail(ErrorKind::kInvalidMesh, "mesh has no triangles");

  for (const auto& t : triangles_)
    for (int p = 0; p < 3; ++p)
      check_edge_sign(edges_, t.edges[p], t.signs[p], t.vertices[kTrianglePairs[p].first],
                      t.vertices[kTrianglePairs[p].second], "triangle");
  for (const auto& t : tetrahedra_) {
    for (int p = 0; p < 6; ++p)
      check_edge_sign(edges_, t.edges[p], t.signs[p], t.vertices[kTetPairs[p].first],
                      t.vertices[kTetPairs[p].second], "tetrahedron");
    for (int i = 0; i < 4; ++i) {
      const int f = t.faces[i];
      if (f < 0 || f >= static_cast<int>(triangles_.size()))
        fail(ErrorKind::kInvalidMesh, "tetrahedron references a missing face");
      std::vector<int> mine;
      for (int p = 0; p < 6; ++p)
        if (kTetPairs[p].first != i && kTetPairs[p].second != i) mine.push_back(t.edges[p]);
      std::vector<int> theirs(triangles_[f].edges.begin(), triangles_[f].edges.end());
      std::sort(mine.begin(), mine.end());
      std::sort(theirs.begin(), theirs.end());
      if (mine != theirs) fail(ErrorKind::kInvalidMesh, "tetrahedron face edges do not match");
    }
  }

  if (dim_ == 2) {
    for (const auto& t : triangles_)
      tops_.push_back({{t.vertices.begin(), t.vertices.end()},
                       {t.edges.begin(), t.edges.end()},
                       {t.signs.begin(), t.signs.end()}});
  } else {
    for (const auto& t : tetrahedra_)
      tops_.push_back({{t.vertices.begin(), t.vertices.end()},
                       {t.edges.begin(), t.edges.end()},
                       {t.signs.begin(), t.signs.end()}});
  }
  validate_combinatorics();
  build_geometry();
}

void Mesh::validate_combinatorics() const {
  // Closed, oriented pseudo-manifold: every codimension-1 cell has exactly two
  // incidences with opposite induced orientations.
  const Eigen::SparseMatrix<int> top_boundary = boundary(dim_);
  std::vector<int> count(top_boundary.rows(), 0);
  std::vector<int> total(top_boundary.rows(), 0);
  if (dim_ == 2) {
    for (const auto& t : triangles_)
      for (int p = 0; p < 3; ++p) ++count[t.edges[p]];
  } else {
    for (const auto& t : tetrahedra_)
      for (int i = 0; i < 4; ++i) ++count[t.faces[i]];
  }
  for (int c = 0; c < top_boundary.outerSize(); ++c)
    for (Eigen::SparseMatrix<int>::InnerIterator it(top_boundary, c); it; ++it) total[it.row()] += it.value();
  for (std::size_t f = 0; f < count.size(); ++f) {
    if (count[f] != 2)
      fail(ErrorKind::kInvalidMesh, "codimension-1 cell " + std::to_string(f) + " lies on " +
                                        std::to_string(count[f]) + " top simplices (need 2)");
    if (total[f] != 0)
      fail(ErrorKind::kInvalidMesh, "inconsistent orientation across cell " + std::to_string(f));
  }
  for (int k = 2; k <= dim_; ++k) {
    const Eigen::SparseMatrix<int> dd = boundary(k - 1) * boundary(k);
    for (int c = 0; c < dd.outerSize(); ++c)
      for (Eigen::SparseMatrix<int>::InnerIterator it(dd, c); it; ++it)
        if (it.value() != 0) fail(ErrorKind::kInvalidMesh, "boundary of a boundary is nonzero");
  }
  // Connectivity.
  std::vector<std::vector<int>> adj(num_vertices_);
  for (const auto& e : edges_) {
    adj[e[0]].push_back(e[1]);
    adj[e[1]].push_back(e[0]);
  }
  std::vector<char> seen(num_vertices_, 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    for (int w : adj[v])
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        q.push(w);
      }
  }
  if (reached != num_vertices_) fail(ErrorKind::kInvalidMesh, "mesh is not connected");
}

void Mesh::build_geometry() {
  const int n = dim_;
  frames_.clear();
  frames_.reserve(tops_.size());
  top_volumes_.resize(num_top());
  const double nfact = factorial(n);
  for (int s = 0; s < num_top(); ++s) {
    const auto& t = tops_[s];
    // Squared lengths by local pair.
    Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(n + 1, n + 1);
    int p = 0;
    for (int i = 0; i <= n; ++i)
      for (int j = i + 1; j <= n; ++j, ++p) {
        const double l = lengths_[t.edges[p]];
        d2(i, j) = d2(j, i) = l * l;
      }
    Eigen::MatrixXd g(n, n);
    for (int i = 1; i <= n; ++i)
      for (int j = 1; j <= n; ++j) g(i - 1, j - 1) = 0.5 * (d2(0, i) + d2(0, j) - d2(i, j));
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    const double scale = g.diagonal().maxCoeff();
    if (llt.info() != Eigen::Success)
      fail(ErrorKind::kInvalidMetric, "simplex " + std::to_string(s) + " violates the triangle inequality");
    Eigen::MatrixXd l = llt.matrixL();
    const double det = l.diagonal().prod();
    if (det <= kDegenerateVolume * std::pow(scale, 0.5 * n))
      fail(ErrorKind::kInvalidMetric, "simplex " + std::to_string(s) + " is degenerate");
    frames_.push_back(std::move(l));
    top_volumes_(s) = det / nfact;
  }
  volume_ = top_volumes_.sum();
}

Mesh Mesh::from_simplices(int dim, const std::vector<std::vector<int>>& simplices,
                          const std::map<std::pair<int, int>, double>& lengths) {
  if (dim != 2 && dim != 3)
    fail(ErrorKind::kUnsupportedDimension, "meshes must have dimension 2 or 3, got " + std::to_string(dim));
  if (simplices.empty()) fail(ErrorKind::kInvalidMesh, "no simplices");
  int nv = 0;
  for (const auto& s : simplices) {
    if (static_cast<int>(s.size()) != dim + 1)
      fail(ErrorKind::kInvalidMesh, "simplex with " + std::to_string(s.size()) + " vertices in dimension " +
                                        std::to_string(dim));
    std::set<int> distinct(s.begin(), s.end());
    if (static_cast<int>(distinct.size()) != dim + 1)
      fail(ErrorKind::kInvalidMesh, "simplex with repeated vertex");
    for (int v : s) {
      if (v < 0) fail(ErrorKind::kInvalidMesh, "negative vertex index");
      nv = std::max(nv, v + 1);
    }
  }
  std::map<std::pair<int, int>, double> len;
  for (const auto& [key, l] : lengths) len[{std::min(key.first, key.second), std::max(key.first, key.second)}] = l;

  std::map<std::pair<int, int>, int> edge_index;
  std::vector<std::array<int, 2>> edges;
  std::vector<double> edge_len;
  auto edge_ref = [&](int a, int b) -> std::pair<int, int> {
    const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
    auto it = edge_index.find(key);
    if (it == edge_index.end()) {
      auto lit = len.find(key);
      if (lit == len.end())
        fail(ErrorKind::kInvalidMesh, "missing edge length for " + std::to_string(key.first) + "-" +
                                          std::to_string(key.second));
      it = edge_index.emplace(key, static_cast<int>(edges.size())).first;
      edges.push_back({key.first, key.second});
      edge_len.push_back(lit->second);
    }
    return {it->second, a < b ? 1 : -1};
  };

  std::map<std::vector<int>, int> tri_index;
  std::vector<MeshTriangle> triangles;
  auto make_triangle = [&](const std::array<int, 3>& v) {
    MeshTriangle t;
    t.vertices = v;
    for (int p = 0; p < 3; ++p) {
      const auto [e, s] = edge_ref(v[kTrianglePairs[p].first], v[kTrianglePairs[p].second]);
      t.edges[p] = e;
      t.signs[p] = s;
    }
    return t;
  };
  std::vector<MeshTetrahedron> tets;
  for (const auto& s : simplices) {
    if (dim == 2) {
      triangles.push_back(make_triangle({s[0], s[1], s[2]}));
      continue;
    }
    MeshTetrahedron t;
    for (int i = 0; i < 4; ++i) t.vertices[i] = s[i];
    for (int p = 0; p < 6; ++p) {
      const auto [e, sg] = edge_ref(s[kTetPairs[p].first], s[kTetPairs[p].second]);
      t.edges[p] = e;
      t.signs[p] = sg;
    }
    for (int i = 0; i < 4; ++i) {
      std::vector<int> face;
      for (int j = 0; j < 4; ++j)
        if (j != i) face.push_back(s[j]);
      const int parity = sort_with_parity(face);
      auto it = tri_index.find(face);
      if (it == tri_index.end()) {
        it = tri_index.emplace(face, static_cast<int>(triangles.size())).first;
        triangles.push_back(make_triangle({face[0], face[1], face[2]}));
      }
      t.faces[i] = it->second;
      t.face_signs[i] = parity;
    }
    tets.push_back(t);
  }
  return Mesh(dim, nv, std::move(edges), std::move(edge_len), std::move(triangles), std::move(tets));
}

bool Mesh::is_simplicial() const {
  std::set<std::pair<int, int>> es;
  for (const auto& e : edges_) {
    if (e[0] == e[1]) return false;
    if (!es.insert({std::min(e[0], e[1]), std::max(e[0], e[1])}).second) return false;
  }
  std::set<std::vector<int>> cells;
  for (const auto& t : triangles_) {
    std::vector<int> v(t.vertices.begin(), t.vertices.end());
    std::sort(v.begin(), v.end());
    if (std::adjacent_find(v.begin(), v.end()) != v.end() || !cells.insert(v).second) return false;
  }
  for (const auto& t : tetrahedra_) {
    std::vector<int> v(t.vertices.begin(), t.vertices.end());
    std::sort(v.begin(), v.end());
    if (std::adjacent_find(v.begin(), v.end()) != v.end() || !cells.insert(v).second) return false;
  }
  return true;
}

int Mesh::euler_characteristic() const {
  return num_vertices_ - num_edges() + static_cast<int>(triangles_.size()) -
         static_cast<int>(tetrahedra_.size());
}

Eigen::SparseMatrix<int> Mesh::boundary(int k) const {
  std::vector<Eigen::Triplet<int>> trips;
  int rows = 0;
  int cols = 0;
  if (k == 1) {
    rows = num_vertices_;
    cols = num_edges();
    for (int e = 0; e < cols; ++e) {
      trips.emplace_back(edges_[e][1], e, 1);
      trips.emplace_back(edges_[e][0], e, -1);
    }
  } else if (k == 2) {
    rows = num_edges();
    cols = static_cast<int>(triangles_.size());
    for (int t = 0; t < cols; ++t) {
      const auto& tr = triangles_[t];
      trips.emplace_back(tr.edges[2], t, tr.signs[2]);
      trips.emplace_back(tr.edges[1], t, -tr.signs[1]);
      trips.emplace_back(tr.edges[0], t, tr.signs[0]);
    }
  } else if (k == 3 && dim_ == 3) {
    rows = static_cast<int>(triangles_.size());
    cols = static_cast<int>(tetrahedra_.size());
    for (int t = 0; t < cols; ++t)
      for (int i = 0; i < 4; ++i)
        trips.emplace_back(tetrahedra_[t].faces[i], t, (i % 2 == 0 ? 1 : -1) * tetrahedra_[t].face_signs[i]);
  } else {
    fail(ErrorKind::kInvalidInput, "no boundary operator of degree " + std::to_string(k));
  }
  Eigen::SparseMatrix<int> m(rows, cols);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

void Mesh::set_vertex_coordinates(Eigen::MatrixXd coords) {
  if (coords.cols() != num_vertices_) fail(ErrorKind::kInvalidInput, "coordinate count mismatch");
  coords_ = std::move(coords);
}

void Mesh::set_edge_displacements(Eigen::MatrixXd displacements) {
  if (displacements.cols() != num_edges()) fail(ErrorKind::kInvalidInput, "displacement count mismatch");
  displacements_ = std::move(displacements);
}

Mesh Mesh::with_edge_lengths(std::vector<double> lengths) const {
  Mesh m(dim_, num_vertices_, edges_, std::move(lengths), triangles_, tetrahedra_);
  m.coords_ = coords_;
  m.displacements_ = displacements_;
  return m;
}

Mesh Mesh::scaled(double c) const {
  if (!(c > 0) || !std::isfinite(c)) fail(ErrorKind::kInvalidInput, "scale factor must be positive");
  std::vector<double> l = lengths_;
  for (double& x : l) x *= c;
  return with_edge_lengths(std::move(l));
}

namespace {

using Point = std::vector<long long>;

long long floor_div(long long a, long long k) { return (a >= 0) ? a / k : -((-a + k - 1) / k); }

class TorusBuilder {
 public:
  TorusBuilder(int b, int k, const TorusMetric& metric) : b_(b), k_(k), metric_(metric) {}

  int vertex(const Point& p) {
    int idx = 0;
    for (int i = b_ - 1; i >= 0; --i) idx = idx * k_ + static_cast<int>(p[i] - floor_div(p[i], k_) * k_);
    return idx;
  }

  std::pair<int, int> edge(const Point& p, const Point& q) {
    const bool forward = p < q;
    const Point& a = forward ? p : q;
    const Point& c = forward ? q : p;
    Point key(2 * b_);
    for (int i = 0; i < b_; ++i) {
      const long long shift = floor_div(a[i], k_) * k_;
      key[i] = a[i] - shift;
      key[b_ + i] = c[i] - a[i];
    }
    auto it = edge_index_.find(key);
    if (it == edge_index_.end()) {
      it = edge_index_.emplace(key, static_cast<int>(edges_.size())).first;
      edges_.push_back({vertex(a), vertex(c)});
      Eigen::VectorXd delta(b_), mid(b_);
      for (int i = 0; i < b_; ++i) {
        delta(i) = static_cast<double>(key[b_ + i]) / k_;
        const double m = (static_cast<double>(key[i]) + 0.5 * static_cast<double>(key[b_ + i])) / k_;
        mid(i) = m - std::floor(m);
      }
      const Eigen::MatrixXd g = metric_(mid);
      lengths_.push_back(std::sqrt(delta.dot(g * delta)));
    }
    return {it->second, forward ? 1 : -1};
  }

  MeshTriangle make_triangle(const std::array<Point, 3>& pts) {
    MeshTriangle t;
    for (int i = 0; i < 3; ++i) t.vertices[i] = vertex(pts[i]);
    for (int p = 0; p < 3; ++p) {
      const auto [e, s] = edge(pts[kTrianglePairs[p].first], pts[kTrianglePairs[p].second]);
      t.edges[p] = e;
      t.signs[p] = s;
    }
    return t;
  }

  std::pair<int, int> face(std::vector<Point> pts) {
    const int parity = sort_with_parity(pts);
    Point key;
    std::array<Point, 3> shifted;
    for (int j = 0; j < 3; ++j) {
      shifted[j] = pts[j];
      for (int i = 0; i < b_; ++i) shifted[j][i] -= floor_div(pts[0][i], k_) * k_;
      key.insert(key.end(), shifted[j].begin(), shifted[j].end());
    }
    auto it = face_index_.find(key);
    if (it == face_index_.end()) {
      it = face_index_.emplace(key, static_cast<int>(triangles_.size())).first;
      triangles_.push_back(make_triangle(shifted));
    }
    return {it->second, parity};
  }

  void add_top(std::vector<Point> pts) {
    const int n = b_;
    Eigen::MatrixXd m(n, n);
    for (int j = 1; j <= n; ++j)
      for (int i = 0; i < n; ++i) m(i, j - 1) = static_cast<double>(pts[j][i] - pts[0][i]);
    if (m.determinant() < 0) std::swap(pts[n - 1], pts[n]);
    if (n == 2) {
      triangles_.push_back(make_triangle({pts[0], pts[1], pts[2]}));
      return;
    }
    MeshTetrahedron t;
    for (int i = 0; i < 4; ++i) t.vertices[i] = vertex(pts[i]);
    for (int p = 0; p < 6; ++p) {
      const auto [e, s] = edge(pts[kTetPairs[p].first], pts[kTetPairs[p].second]);
      t.edges[p] = e;
      t.signs[p] = s;
    }
    for (int i = 0; i < 4; ++i) {
      std::vector<Point> f;
      for (int j = 0; j < 4; ++j)
        if (j != i) f.push_back(pts[j]);
      const auto [idx, parity] = face(f);
      t.faces[i] = idx;
      t.face_signs[i] = parity;
    }
    tets_.push_back(t);
  }

  Mesh build() {
    int nv = 1;
    for (int i = 0; i < b_; ++i) nv *= k_;
    Mesh mesh(b_, nv, edges_, lengths_, triangles_, tets_);
    Eigen::MatrixXd coords(b_, nv);
    for (int v = 0; v < nv; ++v) {
      int r = v;
      for (int i = 0; i < b_; ++i) {
        coords(i, v) = static_cast<double>(r % k_) / k_;
        r /= k_;
      }
    }
    mesh.set_vertex_coordinates(std::move(coords));
    Eigen::MatrixXd disp(b_, static_cast<int>(edges_.size()));
    for (const auto& [key, e] : edge_index_)
      for (int i = 0; i < b_; ++i) disp(i, e) = static_cast<double>(key[b_ + i]) / k_;
    mesh.set_edge_displacements(std::move(disp));
    return mesh;
  }

 private:
  int b_;
  int k_;
  const TorusMetric& metric_;
  std::map<Point, int> edge_index_;
  std::map<Point, int> face_index_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<double> lengths_;
  std::vector<MeshTriangle> triangles_;
  std::vector<MeshTetrahedron> tets_;
};

}  // namespace

Mesh torus_mesh(const Lattice& lattice, int k, const TorusMetric& metric) {
  const int b = lattice.dim();
  if (b != 2 && b != 3)
    fail(ErrorKind::kUnsupportedDimension, "torus meshes exist for b = 2, 3; got " + std::to_string(b));
  if (k < 1) fail(ErrorKind::kInvalidInput, "refinement must be at least 1");
  if (k > 4096) fail(ErrorKind::kResource, "refinement too large");
  const Eigen::MatrixXd& g = lattice.gram();
  TorusBuilder builder(b, k, metric);
  if (b == 2) {
    // Split along the shorter diagonal.
    const bool anti = g(0, 1) > 0;
    for (long long y = 0; y < k; ++y)
      for (long long x = 0; x < k; ++x) {
        const Point c00{x, y}, c10{x + 1, y}, c01{x, y + 1}, c11{x + 1, y + 1};
        if (anti) {
          builder.add_top({c00, c10, c01});
          builder.add_top({c10, c11, c01});
        } else {
          builder.add_top({c00, c10, c11});
          builder.add_top({c00, c11, c01});
        }
      }
  } else {
    // Kuhn subdivision along the shortest of the four cube diagonals.
    std::array<int, 3> flip{1, 1, 1};
    double best = std::numeric_limits<double>::infinity();
    for (int s1 : {1, -1})
      for (int s2 : {1, -1}) {
        const Eigen::Vector3d s(1, s1, s2);
        const double d = s.dot(g * s);
        if (d < best - 1e-12) {
          best = d;
          flip = {1, s1, s2};
        }
      }
    std::array<int, 3> perm{0, 1, 2};
    std::vector<std::array<int, 3>> perms;
    do perms.push_back(perm);
    while (std::next_permutation(perm.begin(), perm.end()));
    for (long long z = 0; z < k; ++z)
      for (long long y = 0; y < k; ++y)
        for (long long x = 0; x < k; ++x) {
          Point start{x, y, z};
          for (int i = 0; i < 3; ++i)
            if (flip[i] < 0) ++start[i];
          for (const auto& pi : perms) {
            std::vector<Point> pts{start};
            for (int j = 0; j < 3; ++j) {
              Point next = pts.back();
              next[pi[j]] += flip[pi[j]];
              pts.push_back(next);
            }
            builder.add_top(std::move(pts));
          }
        }
  }
  return builder.build();
}

Mesh flat_torus_mesh(const Lattice& lattice, int k) {
  const Eigen::MatrixXd g = lattice.gram();
  return torus_mesh(lattice, k, [g](const Eigen::VectorXd&) { return g; });
}

namespace {

Eigen::MatrixXd upper_factor(const Eigen::MatrixXd& gram) {
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) fail(ErrorKind::kInvalidMetric, "Gram matrix is not positive definite");
  return llt.matrixU();
}

void check_amplitude(double a) {
  if (!(std::abs(a) < 1.0)) fail(ErrorKind::kInvalidInput, "perturbation amplitude must lie in (-1, 1)");
}

}  // namespace

TorusMetric conformal_bump_metric(const Eigen::MatrixXd& gram, double amplitude) {
  check_amplitude(amplitude);
  upper_factor(gram);
  return [gram, amplitude](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    const double f = 1.0 + amplitude * std::sin(2 * M_PI * x(0)) * std::sin(2 * M_PI * x(1));
    return f * f * gram;
  };
}

TorusMetric stretch_bump_metric(const Eigen::MatrixXd& gram, double amplitude) {
  check_amplitude(amplitude);
  const Eigen::MatrixXd u = upper_factor(gram);
  return [u, amplitude](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    Eigen::MatrixXd d = Eigen::MatrixXd::Identity(u.rows(), u.rows());
    const double f = 1.0 + amplitude * std::sin(2 * M_PI * x(1));
    d(0, 0) = f * f;
    return u.transpose() * d * u;
  };
}

TorusMetric random_metric(const Eigen::MatrixXd& gram, double amplitude, unsigned long long seed) {
  const Eigen::MatrixXd u = upper_factor(gram);
  const int b = static_cast<int>(gram.rows());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> freq(-1, 1);
  std::uniform_real_distribution<double> phase(0.0, 2 * M_PI);
  struct Mode {
    Eigen::VectorXd k;
    double phase;
    Eigen::MatrixXd s;
  };
  std::vector<Mode> modes;
  while (modes.size() < 3) {
    Mode m{Eigen::VectorXd(b), phase(rng), Eigen::MatrixXd(b, b)};
    for (int i = 0; i < b; ++i) m.k(i) = freq(rng);
    if (m.k.isZero()) continue;
    for (int i = 0; i < b; ++i)
      for (int j = i; j < b; ++j) m.s(i, j) = m.s(j, i) = normal(rng);
    m.s /= Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m.s).eigenvalues().cwiseAbs().maxCoeff();
    modes.push_back(std::move(m));
  }
  return [u, amplitude, modes](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(u.rows(), u.rows());
    for (const Mode& m : modes) s += std::cos(2 * M_PI * m.k.dot(x) + m.phase) * m.s;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(amplitude * s / 3.0);
    const Eigen::MatrixXd e = es.eigenvectors() * es.eigenvalues().array().exp().matrix().asDiagonal() *
                              es.eigenvectors().transpose();
    return u.transpose() * e * u;
  };
}

Mesh conformal_scale(const Mesh& mesh, const Eigen::VectorXd& factors) {
  if (factors.size() != mesh.num_vertices())
    fail(ErrorKind::kInvalidInput, "conformal factor count does not match vertex count");
  if (!factors.allFinite() || (factors.array() <= 0).any())
    fail(ErrorKind::kInvalidInput, "conformal factors must be positive");
  std::vector<double> l = mesh.edge_lengths();
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const auto& ed = mesh.edges()[e];
    l[e] *= std::sqrt(factors(ed[0]) * factors(ed[1]));
  }
  return mesh.with_edge_lengths(std::move(l));
}

double volume(const Mesh& mesh) { return mesh.volume(); }

Mesh normalize_volume(const Mesh& mesh) { return mesh.scaled(std::pow(mesh.volume(), -1.0 / mesh.dim())); }

Eigen::VectorXd local_covector(const Mesh& mesh, int s, const Form& form) {
  const TopSimplex& t = mesh.top(s);
  const int n = mesh.dim();
  Eigen::VectorXd c(n);
  // Pairs (0,i) occupy local slots 0..n-1.
  for (int i = 0; i < n; ++i) c(i) = t.signs[i] * form(t.edges[i]);
  return mesh.top_frame(s).triangularView<Eigen::Lower>().solve(c);
}

Eigen::VectorXd pointwise_norms(const Mesh& mesh, const Form& form) {
  if (form.size() != mesh.num_edges()) fail(ErrorKind::kInvalidForm, "form size does not match edge count");
  Eigen::VectorXd out(mesh.num_top());
  for (int s = 0; s < mesh.num_top(); ++s) out(s) = local_covector(mesh, s, form).norm();
  return out;
}

Eigen::VectorXd coboundary(const Mesh& mesh, const Form& form) {
  if (form.size() != mesh.num_edges()) fail(ErrorKind::kInvalidForm, "form size does not match edge count");
  const auto& tris = mesh.triangles();
  Eigen::VectorXd out(static_cast<int>(tris.size()));
  for (std::size_t t = 0; t < tris.size(); ++t) {
    const auto& tr = tris[t];
    out(static_cast<int>(t)) = tr.signs[2] * form(tr.edges[2]) - tr.signs[1] * form(tr.edges[1]) +
                               tr.signs[0] * form(tr.edges[0]);
  }
  return out;
}

bool is_closed(const Mesh& mesh, const Form& form, double tolerance) {
  const double scale = std::max(1.0, form.cwiseAbs().maxCoeff());
  return coboundary(mesh, form).cwiseAbs().maxCoeff() <= tolerance * scale;
}

Form vertex_gradient(const Mesh& mesh, const Eigen::VectorXd& f) {
  if (f.size() != mesh.num_vertices()) fail(ErrorKind::kInvalidInput, "vertex function size mismatch");
  Form out(mesh.num_edges());
  for (int e = 0; e < mesh.num_edges(); ++e) out(e) = f(mesh.edges()[e][1]) - f(mesh.edges()[e][0]);
  return out;
}

double wedge_integral(const Form& a, const Form& b, const Mesh& mesh) {
  if (mesh.dim() != 2) fail(ErrorKind::kUnsupportedDimension, "wedge integral of 1-forms needs a surface");
  if (!is_closed(mesh, a) || !is_closed(mesh, b))
    fail(ErrorKind::kInvalidForm, "wedge integral needs closed forms");
  double total = 0.0;
  for (int s = 0; s < mesh.num_top(); ++s) {
    const Eigen::VectorXd x = local_covector(mesh, s, a);
    const Eigen::VectorXd y = local_covector(mesh, s, b);
    total += mesh.top_volume(s) * (x(0) * y(1) - x(1) * y(0));
  }
  return total;
}

}  // namespace systola
