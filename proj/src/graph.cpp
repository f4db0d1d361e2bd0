#include "graphfed/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "graphfed/error.hpp"

namespace graphfed {

Graph::Graph(std::vector<std::size_t> offsets, std::vector<VertexId> adjacency)
    : offsets_(std::move(offsets)), neighbors_(std::move(adjacency)) {
  if (offsets_.empty() || offsets_.front() != 0 || offsets_.back() != neighbors_.size())
    throw InputError("Graph: inconsistent CSR offsets");
  const std::size_t n = num_vertices();
  for (std::size_t v = 0; v < n; ++v) {
    if (offsets_[v] > offsets_[v + 1]) throw InputError("Graph: offsets must be non-decreasing");
    auto nb = neighbors(static_cast<VertexId>(v));
    for (std::size_t i = 0; i < nb.size(); ++i) {
      if (nb[i] >= n) throw InputError("Graph: neighbor id out of range");
      if (nb[i] == v) throw InputError("Graph: self-loop");
      if (i > 0 && nb[i - 1] >= nb[i]) throw InputError("Graph: neighbor list not strictly sorted");
    }
  }
  for (std::size_t v = 0; v < n; ++v)
    for (VertexId u : neighbors(static_cast<VertexId>(v)))
      if (!has_edge(u, static_cast<VertexId>(v))) throw InputError("Graph: adjacency not symmetric");
}

bool Graph::has_edge(VertexId u, VertexId v) const {
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (VertexId u = 0; u < num_vertices(); ++u)
    for (VertexId v : neighbors(u))
      if (u < v) out.emplace_back(u, v);
  return out;
}

Graph from_edge_list(std::span<const Edge> edges, std::size_t n) {
  std::vector<Edge> directed;
  directed.reserve(edges.size() * 2);
  for (auto [u, v] : edges) {
    if (u >= n || v >= n)
      throw InputError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                       ") references a vertex >= " + std::to_string(n));
    if (u == v) continue;
    directed.emplace_back(u, v);
    directed.emplace_back(v, u);
  }
  std::ranges::sort(directed);
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

  std::vector<std::size_t> offsets(n + 1, 0);
  std::vector<VertexId> neighbors;
  neighbors.reserve(directed.size());
  for (auto [u, v] : directed) {
    ++offsets[u + 1];
    neighbors.push_back(v);
  }
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
  return Graph(std::move(offsets), std::move(neighbors));
}

double SparseMatrix::at(std::size_t r, std::size_t c) const {
  auto first = indices.begin() + static_cast<std::ptrdiff_t>(offsets[r]);
  auto last = indices.begin() + static_cast<std::ptrdiff_t>(offsets[r + 1]);
  auto it = std::lower_bound(first, last, static_cast<VertexId>(c));
  if (it == last || *it != c) return 0.0;
  return values[static_cast<std::size_t>(it - indices.begin())];
}

Matrix SparseMatrix::to_dense() const {
  Matrix out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t k = offsets[r]; k < offsets[r + 1]; ++k) out(r, indices[k]) += values[k];
  return out;
}

namespace {

// CSR of A + I with the diagonal merged into the sorted position.
SparseMatrix with_self_loops(const Graph& g) {
  const std::size_t n = g.num_vertices();
  SparseMatrix m;
  m.rows = m.cols = n;
  m.offsets.assign(n + 1, 0);
  m.indices.reserve(2 * g.num_edges() + n);
  for (VertexId v = 0; v < n; ++v) {
    bool placed = false;
    for (VertexId u : g.neighbors(v)) {
      if (!placed && u > v) {
        m.indices.push_back(v);
        placed = true;
      }
      m.indices.push_back(u);
    }
    if (!placed) m.indices.push_back(v);
    m.offsets[v + 1] = m.indices.size();
  }
  m.values.assign(m.indices.size(), 0.0);
  return m;
}

}  // namespace

NormalizedAdjacency normalize_adjacency(const Graph& g) {
  SparseMatrix m = with_self_loops(g);
  std::vector<double> inv_sqrt(m.rows);
  for (VertexId v = 0; v < m.rows; ++v)
    inv_sqrt[v] = 1.0 / std::sqrt(static_cast<double>(g.degree(v) + 1));
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t k = m.offsets[r]; k < m.offsets[r + 1]; ++k)
      m.values[k] = inv_sqrt[r] * inv_sqrt[m.indices[k]];
  return m;
}

SparseMatrix mean_adjacency(const Graph& g) {
  SparseMatrix m = with_self_loops(g);
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double w = 1.0 / static_cast<double>(m.offsets[r + 1] - m.offsets[r]);
    for (std::size_t k = m.offsets[r]; k < m.offsets[r + 1]; ++k) m.values[k] = w;
  }
  return m;
}

Matrix spmm(const SparseMatrix& a, const Matrix& x) {
  if (a.cols != x.rows()) throw InputError("spmm: dimension mismatch");
  Matrix out(a.rows, x.cols());
  const std::size_t f = x.cols();
  for (std::size_t r = 0; r < a.rows; ++r) {
    double* dst = out.row(r).data();
    for (std::size_t k = a.offsets[r]; k < a.offsets[r + 1]; ++k) {
      const double w = a.values[k];
      const double* src = x.row(a.indices[k]).data();
      for (std::size_t j = 0; j < f; ++j) dst[j] += w * src[j];
    }
  }
  return out;
}

Matrix spmm_transposed(const SparseMatrix& a, const Matrix& x) {
  if (a.rows != x.rows()) throw InputError("spmm_transposed: dimension mismatch");
  Matrix out(a.cols, x.cols());
  const std::size_t f = x.cols();
  for (std::size_t r = 0; r < a.rows; ++r) {
    const double* src = x.row(r).data();
    for (std::size_t k = a.offsets[r]; k < a.offsets[r + 1]; ++k) {
      const double w = a.values[k];
      double* dst = out.row(a.indices[k]).data();
      for (std::size_t j = 0; j < f; ++j) dst[j] += w * src[j];
    }
  }
  return out;
}

InducedSubgraph induced_subgraph(const Graph& g, std::span<const VertexId> vertex_set) {
  const std::size_t n = g.num_vertices();
  InducedSubgraph sub;
  sub.global_to_local.assign(n, InducedSubgraph::kAbsent);
  sub.local_to_global.assign(vertex_set.begin(), vertex_set.end());
  for (std::size_t i = 0; i < vertex_set.size(); ++i) {
    const VertexId v = vertex_set[i];
    if (v >= n) throw InputError("induced_subgraph: vertex id out of range");
    if (sub.global_to_local[v] != InducedSubgraph::kAbsent)
      throw InputError("induced_subgraph: repeated vertex id");
    sub.global_to_local[v] = static_cast<VertexId>(i);
  }
  std::vector<std::size_t> offsets(vertex_set.size() + 1, 0);
  std::vector<VertexId> neighbors;
  for (std::size_t i = 0; i < vertex_set.size(); ++i) {
    const std::size_t start = neighbors.size();
    for (VertexId u : g.neighbors(vertex_set[i])) {
      const VertexId lu = sub.global_to_local[u];
      if (lu != InducedSubgraph::kAbsent) neighbors.push_back(lu);
    }
    std::sort(neighbors.begin() + static_cast<std::ptrdiff_t>(start), neighbors.end());
    offsets[i + 1] = neighbors.size();
  }
  sub.graph = Graph(std::move(offsets), std::move(neighbors));
  return sub;
}

}  // namespace graphfed
