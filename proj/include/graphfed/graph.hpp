#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "graphfed/matrix.hpp"

namespace graphfed {

using VertexId = std::uint32_t;
using Edge = std::pair<VertexId, VertexId>;

/// Undirected simple graph in CSR form. Every edge is stored in both
/// directions; neighbor lists are sorted and free of duplicates and self-loops.
class Graph {
 public:
  Graph() = default;
  // Takes ownership of prebuilt CSR arrays. Validates the invariants.
  Graph(std::vector<std::size_t> offsets, std::vector<VertexId> neighbors);

  std::size_t num_vertices() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t num_edges() const { return neighbors_.size() / 2; }

  std::span<const VertexId> neighbors(VertexId v) const {
    return {neighbors_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }
  std::size_t degree(VertexId v) const { return offsets_[v + 1] - offsets_[v]; }
  bool has_edge(VertexId u, VertexId v) const;

  const std::vector<std::size_t>& csr_offsets() const { return offsets_; }
  const std::vector<VertexId>& csr_neighbors() const { return neighbors_; }

  // Each undirected edge once, as (u, v) with u < v, in ascending order.
  std::vector<Edge> edges() const;

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<VertexId> neighbors_;
};

/// Builds an undirected graph; input pairs are symmetrized, duplicates and
/// self-loops are dropped. Throws InputError on ids >= n.
Graph from_edge_list(std::span<const Edge> edges, std::size_t n);

/// Real-valued CSR matrix (rows x cols).
struct SparseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> offsets{0};
  std::vector<VertexId> indices;
  std::vector<double> values;

  std::size_t nnz() const { return values.size(); }
  double at(std::size_t r, std::size_t c) const;
  Matrix to_dense() const;
};

/// D^{-1/2} (A + I) D^{-1/2}, D the degree matrix of A + I.
using NormalizedAdjacency = SparseMatrix;

NormalizedAdjacency normalize_adjacency(const Graph& g);

/// Row-normalized (A + I): row v averages v with all of its neighbors.
SparseMatrix mean_adjacency(const Graph& g);

/// a * x. Throws InputError when a.cols != x.rows.
Matrix spmm(const SparseMatrix& a, const Matrix& x);
/// a^T * x. Throws InputError when a.rows != x.rows.
Matrix spmm_transposed(const SparseMatrix& a, const Matrix& x);

struct InducedSubgraph {
  Graph graph;
  // local id -> global id; local ids follow the order of the input vertex set.
  std::vector<VertexId> local_to_global;
  // global id -> local id, or kAbsent.
  std::vector<VertexId> global_to_local;

  static constexpr VertexId kAbsent = static_cast<VertexId>(-1);
};

/// Keeps exactly the edges with both endpoints in vertex_set. Throws
/// InputError on out-of-range or repeated ids.
InducedSubgraph induced_subgraph(const Graph& g, std::span<const VertexId> vertex_set);

}  // namespace graphfed
