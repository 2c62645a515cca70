#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <string>

#include "systola/error.hpp"
#include "systola/mesh.hpp"

namespace systola {
namespace {

using boost::multiprecision::cpp_int;
using BigMatrix = std::vector<std::vector<cpp_int>>;

long long checked_add(long long a, long long b) {
  long long r;
  if (__builtin_add_overflow(a, b, &r)) fail(ErrorKind::kInternal, "integer overflow in homology elimination");
  return r;
}

long long checked_mul(long long a, long long b) {
  long long r;
  if (__builtin_mul_overflow(a, b, &r)) fail(ErrorKind::kInternal, "integer overflow in homology elimination");
  return r;
}

long long to_ll(const cpp_int& x) {
  if (x > std::numeric_limits<long long>::max() || x < std::numeric_limits<long long>::min())
    fail(ErrorKind::kInternal, "homology basis coefficient does not fit in 64 bits");
  return static_cast<long long>(x);
}

// Smith normal form of `a` (rows x cols), tracking only the column transform
// q and its inverse: a_original * q = p^{-1} * diag.
struct ColumnSnf {
  std::vector<cpp_int> diagonal;
  BigMatrix q;
  BigMatrix q_inv;
};

ColumnSnf smith_columns(BigMatrix a, int cols) {
  const int rows = static_cast<int>(a.size());
  ColumnSnf out;
  out.q.assign(cols, std::vector<cpp_int>(cols, 0));
  out.q_inv.assign(cols, std::vector<cpp_int>(cols, 0));
  for (int i = 0; i < cols; ++i) out.q[i][i] = out.q_inv[i][i] = 1;

  auto swap_cols = [&](int i, int j) {
    if (i == j) return;
    for (auto& row : a) std::swap(row[i], row[j]);
    for (auto& row : out.q) std::swap(row[i], row[j]);
    std::swap(out.q_inv[i], out.q_inv[j]);
  };
  // col_j -= m * col_t
  auto col_op = [&](int t, int j, const cpp_int& m) {
    if (m == 0) return;
    for (auto& row : a) row[j] -= m * row[t];
    for (auto& row : out.q) row[j] -= m * row[t];
    for (int c = 0; c < cols; ++c) out.q_inv[t][c] += m * out.q_inv[j][c];
  };

  for (int t = 0; t < std::min(rows, cols); ++t) {
    while (true) {
      int pr = -1;
      int pc = -1;
      for (int r = t; r < rows; ++r)
        for (int c = t; c < cols; ++c)
          if (a[r][c] != 0 && (pr < 0 || abs(a[r][c]) < abs(a[pr][pc]))) {
            pr = r;
            pc = c;
          }
      if (pr < 0) return out;
      std::swap(a[t], a[pr]);
      swap_cols(t, pc);
      bool clean = true;
      for (int r = t + 1; r < rows; ++r) {
        const cpp_int m = a[r][t] / a[t][t];
        if (m != 0)
          for (int c = t; c < cols; ++c) a[r][c] -= m * a[t][c];
        clean = clean && a[r][t] == 0;
      }
      for (int c = t + 1; c < cols; ++c) {
        col_op(t, c, a[t][c] / a[t][t]);
        clean = clean && a[t][c] == 0;
      }
      if (!clean) continue;
      // Divisibility of the remaining block keeps the factors invariant.
      int bad = -1;
      for (int r = t + 1; r < rows && bad < 0; ++r)
        for (int c = t + 1; c < cols; ++c)
          if (a[r][c] % a[t][t] != 0) {
            bad = r;
            break;
          }
      if (bad < 0) break;
      for (int c = t; c < cols; ++c) a[t][c] += a[bad][c];
    }
    out.diagonal.push_back(abs(a[t][t]));
  }
  return out;
}

struct Elimination {
  int var;
  long long sign;
  std::vector<std::pair<int, long long>> rest;
};

}  // namespace

std::vector<long long> invariant_factors(const std::vector<std::vector<long long>>& matrix) {
  if (matrix.empty()) return {};
  const int cols = static_cast<int>(matrix.front().size());
  BigMatrix a;
  for (const auto& row : matrix) {
    if (static_cast<int>(row.size()) != cols) fail(ErrorKind::kInvalidInput, "ragged integer matrix");
    a.emplace_back(row.begin(), row.end());
  }
  std::vector<long long> out;
  for (const auto& d : smith_columns(std::move(a), cols).diagonal) out.push_back(to_ll(d));
  return out;
}

Eigen::MatrixXd HomologyData::pairing() const {
  Eigen::MatrixXd p(b1, b1);
  for (int i = 0; i < b1; ++i)
    for (int j = 0; j < b1; ++j)
      p(i, j) = static_cast<double>(h1_cobasis[i].dot(h1_basis[j]));
  return p;
}

Eigen::MatrixXd HomologyData::cobasis_matrix() const {
  const int e = h1_cobasis.empty() ? 0 : static_cast<int>(h1_cobasis.front().size());
  Eigen::MatrixXd m(e, b1);
  for (int i = 0; i < b1; ++i) m.col(i) = h1_cobasis[i].cast<double>();
  return m;
}

Eigen::VectorXd periods(const HomologyData& homology, const Form& form) {
  Eigen::VectorXd out(homology.b1);
  for (int j = 0; j < homology.b1; ++j) out(j) = homology.h1_basis[j].cast<double>().dot(form);
  return out;
}

HomologyData homology_basis(const Mesh& mesh) {
  const int nv = mesh.num_vertices();
  const int ne = mesh.num_edges();
  const auto& edges = mesh.edges();

  // BFS spanning tree rooted at vertex 0.
  std::vector<std::vector<int>> incident(nv);
  for (int e = 0; e < ne; ++e) {
    incident[edges[e][0]].push_back(e);
    if (edges[e][1] != edges[e][0]) incident[edges[e][1]].push_back(e);
  }
  std::vector<int> parent_edge(nv, -1);
  std::vector<char> seen(nv, 0);
  std::vector<char> in_tree(ne, 0);
  std::queue<int> bfs;
  bfs.push(0);
  seen[0] = 1;
  while (!bfs.empty()) {
    const int v = bfs.front();
    bfs.pop();
    for (int e : incident[v]) {
      const int w = edges[e][0] == v ? edges[e][1] : edges[e][0];
      if (seen[w]) continue;
      seen[w] = 1;
      parent_edge[w] = e;
      in_tree[e] = 1;
      bfs.push(w);
    }
  }

  std::vector<int> var_of_edge(ne, -1);
  std::vector<int> edge_of_var;
  for (int e = 0; e < ne; ++e)
    if (!in_tree[e]) {
      var_of_edge[e] = static_cast<int>(edge_of_var.size());
      edge_of_var.push_back(e);
    }
  const int nvar = static_cast<int>(edge_of_var.size());

  // Triangle relations on the non-tree edges.
  std::vector<std::map<int, long long>> rows;
  const Eigen::SparseMatrix<int> d2 = mesh.boundary(2);
  for (int t = 0; t < d2.outerSize(); ++t) {
    std::map<int, long long> row;
    for (Eigen::SparseMatrix<int>::InnerIterator it(d2, t); it; ++it) {
      const int v = var_of_edge[it.row()];
      if (v < 0) continue;
      row[v] += it.value();
      if (row[v] == 0) row.erase(v);
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }

  // Unit-pivot elimination, shortest rows first.
  std::vector<std::set<int>> col_rows(nvar);
  for (int r = 0; r < static_cast<int>(rows.size()); ++r)
    for (const auto& [c, v] : rows[r]) col_rows[c].insert(r);
  std::set<std::pair<std::size_t, int>> queue;
  for (int r = 0; r < static_cast<int>(rows.size()); ++r) queue.insert({rows[r].size(), r});
  std::vector<char> row_alive(rows.size(), 1);
  std::vector<char> stuck(rows.size(), 0);
  std::vector<char> var_alive(nvar, 1);
  std::vector<Elimination> elims;

  while (!queue.empty()) {
    const int t = queue.begin()->second;
    queue.erase(queue.begin());
    if (rows[t].empty()) {
      row_alive[t] = 0;
      continue;
    }
    int pivot = -1;
    for (const auto& [c, v] : rows[t])
      if ((v == 1 || v == -1) && (pivot < 0 || col_rows[c].size() < col_rows[pivot].size())) pivot = c;
    if (pivot < 0) {
      stuck[t] = 1;
      continue;
    }
    const long long s = rows[t][pivot];
    Elimination el{pivot, s, {}};
    for (const auto& [c, v] : rows[t])
      if (c != pivot) el.rest.emplace_back(c, v);
    const std::vector<int> targets(col_rows[pivot].begin(), col_rows[pivot].end());
    for (int r : targets) {
      if (r == t) continue;
      if (!stuck[r]) queue.erase({rows[r].size(), r});
      stuck[r] = 0;
      const long long factor = checked_mul(rows[r][pivot], s);
      for (const auto& [c, v] : rows[t]) {
        const long long nvl = checked_add(rows[r][c], -checked_mul(factor, v));
        if (nvl == 0) {
          rows[r].erase(c);
          col_rows[c].erase(r);
        } else {
          rows[r][c] = nvl;
          col_rows[c].insert(r);
        }
      }
      queue.insert({rows[r].size(), r});
    }
    for (const auto& [c, v] : rows[t]) col_rows[c].erase(t);
    rows[t].clear();
    row_alive[t] = 0;
    var_alive[pivot] = 0;
    elims.push_back(std::move(el));
  }

  std::vector<int> free_vars;
  for (int v = 0; v < nvar; ++v)
    if (var_alive[v]) free_vars.push_back(v);
  std::vector<int> free_pos(nvar, -1);
  for (std::size_t i = 0; i < free_vars.size(); ++i) free_pos[free_vars[i]] = static_cast<int>(i);
  const int nf = static_cast<int>(free_vars.size());
  BigMatrix dense;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!row_alive[r] || rows[r].empty()) continue;
    std::vector<cpp_int> row(nf, 0);
    for (const auto& [c, v] : rows[r]) row[free_pos[c]] = v;
    dense.push_back(std::move(row));
  }
  const ColumnSnf snf = smith_columns(std::move(dense), nf);
  const int rank = static_cast<int>(snf.diagonal.size());

  HomologyData out;
  out.b1 = nf - rank;
  for (const auto& d : snf.diagonal)
    if (d > 1) out.torsion.push_back(to_ll(d));
  out.tree_parent_edge = parent_edge;

  // Fundamental cycle of a non-tree edge: the edge plus the tree path back.
  auto root_path = [&](int v, long long coef, IntCochain& chain) {
    while (parent_edge[v] >= 0) {
      const int e = parent_edge[v];
      const int up = edges[e][0] == v ? edges[e][1] : edges[e][0];
      chain(e) += (edges[e][0] == v) ? coef : -coef;
      v = up;
    }
  };

  for (int i = rank; i < nf; ++i) {
    std::vector<long long> x(nvar, 0);
    for (int j = 0; j < nf; ++j) x[free_vars[j]] = to_ll(snf.q[j][i]);
    for (auto it = elims.rbegin(); it != elims.rend(); ++it) {
      long long acc = 0;
      for (const auto& [c, v] : it->rest) acc = checked_add(acc, checked_mul(v, x[c]));
      x[it->var] = -it->sign * acc;
    }
    IntCochain cocycle = IntCochain::Zero(ne);
    for (int v = 0; v < nvar; ++v) cocycle(edge_of_var[v]) = x[v];
    out.h1_cobasis.push_back(std::move(cocycle));

    IntCochain cycle = IntCochain::Zero(ne);
    for (int j = 0; j < nf; ++j) {
      const long long coef = to_ll(snf.q_inv[i][j]);
      if (coef == 0) continue;
      const int e = edge_of_var[free_vars[j]];
      cycle(e) += coef;
      root_path(edges[e][1], coef, cycle);
      root_path(edges[e][0], -coef, cycle);
    }
    out.h1_basis.push_back(std::move(cycle));
  }

  // On torus meshes, rotate to the basis whose cycles translate by the lattice generators.
  const auto& disp = mesh.edge_displacements();
  if (disp && disp->rows() == out.b1 && out.b1 > 0) {
    const int b = out.b1;
    Eigen::MatrixXd d(b, b);
    for (int j = 0; j < b; ++j) d.col(j) = *disp * out.h1_basis[j].cast<double>();
    const Eigen::MatrixXd dr = d.array().round().matrix();
    if ((d - dr).cwiseAbs().maxCoeff() < 1e-6 && std::abs(std::abs(dr.determinant()) - 1.0) < 1e-9) {
      const Eigen::MatrixXd inv = dr.inverse().array().round().matrix();
      std::vector<IntCochain> cycles(b, IntCochain::Zero(ne));
      std::vector<IntCochain> cocycles(b, IntCochain::Zero(ne));
      for (int i = 0; i < b; ++i)
        for (int j = 0; j < b; ++j) {
          cycles[i] += static_cast<long long>(inv(j, i)) * out.h1_basis[j];
          cocycles[i] += static_cast<long long>(dr(i, j)) * out.h1_cobasis[j];
        }
      out.h1_basis = std::move(cycles);
      out.h1_cobasis = std::move(cocycles);
    }
  }
  return out;
}

}  // namespace systola
