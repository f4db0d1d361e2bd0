#pragma once

// Independent reference implementations used only by tests. They work on
// dense matrices and plain adjacency sets and share no code paths with the
// library kernels they check.

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <random>
#include <set>
#include <vector>

#include "graphfed/graph.hpp"
#include "graphfed/matrix.hpp"

namespace oracle {

using Dense = std::vector<std::vector<double>>;

inline Dense zeros(std::size_t r, std::size_t c) { return Dense(r, std::vector<double>(c, 0.0)); }

inline Dense from(const graphfed::Matrix& m) {
  Dense d = zeros(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) d[i][j] = m(i, j);
  return d;
}

inline Dense mul(const Dense& a, const Dense& b) {
  Dense out = zeros(a.size(), b.empty() ? 0 : b[0].size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < out[i].size(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < b.size(); ++k) acc += a[i][k] * b[k][j];
      out[i][j] = acc;
    }
  return out;
}

// Dense D^{-1/2}(A+I)D^{-1/2} from an undirected edge set.
inline Dense normalized_adjacency(std::size_t n, const std::vector<graphfed::Edge>& edges) {
  Dense a = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i) a[i][i] = 1.0;
  for (auto [u, v] : edges)
    if (u != v) a[u][v] = a[v][u] = 1.0;
  std::vector<double> deg(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) deg[i] += a[i][j];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i][j] /= std::sqrt(deg[i] * deg[j]);
  return a;
}

// Dense GCN forward: H = relu(A H W) on hidden layers, logits out.
inline Dense gcn_forward(const Dense& a, const Dense& x, const std::vector<Dense>& weights) {
  Dense h = x;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    h = mul(mul(a, h), weights[l]);
    if (l + 1 < weights.size())
      for (auto& row : h)
        for (double& v : row) v = std::max(v, 0.0);
  }
  return h;
}

inline double cross_entropy(const Dense& logits, const std::vector<std::uint32_t>& labels,
                            const std::vector<std::size_t>& rows) {
  double total = 0.0;
  for (std::size_t r : rows) {
    double z = 0.0;
    for (double v : logits[r]) z += std::exp(v);
    total += -(logits[r][labels[r]] - std::log(z));
  }
  return total / static_cast<double>(rows.size());
}

// Central finite difference of f at every entry of params.
inline std::vector<Dense> finite_difference(std::vector<Dense> params, const std::function<double(const std::vector<Dense>&)>& f,
                                            double h = 1e-4) {
  std::vector<Dense> grads;
  for (std::size_t t = 0; t < params.size(); ++t) {
    Dense g = zeros(params[t].size(), params[t][0].size());
    for (std::size_t i = 0; i < params[t].size(); ++i)
      for (std::size_t j = 0; j < params[t][i].size(); ++j) {
        const double keep = params[t][i][j];
        params[t][i][j] = keep + h;
        const double up = f(params);
        params[t][i][j] = keep - h;
        const double down = f(params);
        params[t][i][j] = keep;
        g[i][j] = (up - down) / (2.0 * h);
      }
    grads.push_back(std::move(g));
  }
  return grads;
}

// Hop levels reachable from the vertex set `start` while staying inside the
// vertex set `allowed`: level 1 = allowed neighbors of start, level k+1 =
// allowed neighbors of level k not seen before.
inline std::vector<std::set<graphfed::VertexId>> bfs_levels(const std::vector<std::set<graphfed::VertexId>>& adj,
                                                          const std::set<graphfed::VertexId>& start,
                                                          const std::set<graphfed::VertexId>& allowed) {
  std::vector<std::set<graphfed::VertexId>> levels;
  std::set<graphfed::VertexId> seen;
  std::set<graphfed::VertexId> frontier = start;
  while (true) {
    std::set<graphfed::VertexId> next;
    for (auto v : frontier)
      for (auto u : adj[v])
        if (allowed.count(u) && !seen.count(u)) next.insert(u);
    if (next.empty()) break;
    seen.insert(next.begin(), next.end());
    levels.push_back(next);
    frontier = next;
  }
  return levels;
}

// True when every vertex of `target` has a path to `source` whose interior
// lies inside `allowed` (plain BFS from source).
inline bool all_reachable_through(const std::vector<std::set<graphfed::VertexId>>& adj,
                                  const std::set<graphfed::VertexId>& source,
                                  const std::set<graphfed::VertexId>& allowed,
                                  const std::set<graphfed::VertexId>& target) {
  std::set<graphfed::VertexId> reached;
  std::deque<graphfed::VertexId> q(source.begin(), source.end());
  std::set<graphfed::VertexId> visited = source;
  while (!q.empty()) {
    auto v = q.front();
    q.pop_front();
    for (auto u : adj[v])
      if (allowed.count(u) && visited.insert(u).second) {
        reached.insert(u);
        q.push_back(u);
      }
  }
  for (auto t : target)
    if (!reached.count(t)) return false;
  return true;
}

inline double counting_accuracy(const std::vector<std::uint32_t>& pred, const std::vector<std::uint32_t>& truth,
                                const std::vector<std::size_t>& rows) {
  std::size_t correct = 0;
  for (auto r : rows) correct += pred[r] == truth[r];
  return static_cast<double>(correct) / static_cast<double>(rows.size());
}

inline std::vector<graphfed::Edge> random_edges(std::size_t n, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(p);
  std::vector<graphfed::Edge> edges;
  for (graphfed::VertexId u = 0; u < n; ++u)
    for (graphfed::VertexId v = u + 1; v < n; ++v)
      if (coin(rng)) edges.emplace_back(u, v);
  return edges;
}

inline graphfed::Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  graphfed::Matrix m(r, c);
  for (double& v : m.data()) v = dist(rng);
  return m;
}

// Checks one breadth-first sample against plain BFS hop levels: the result
// must be whole levels 1..k followed by a subset of level k+1 that fills the
// quota, or every reachable vertex when fewer than quota exist.
inline bool matches_levels(const std::vector<std::set<graphfed::VertexId>>& levels, std::size_t quota,
                           const std::vector<graphfed::VertexId>& result) {
  std::set<graphfed::VertexId> got(result.begin(), result.end());
  if (got.size() != result.size()) return false;
  std::size_t remaining = quota;
  for (const auto& level : levels) {
    if (remaining == 0) break;
    if (level.size() >= remaining) {
      std::size_t inside = 0;
      for (auto v : level) inside += got.count(v);
      if (inside != remaining) return false;
      for (auto v : level) got.erase(v);
      return got.empty();
    }
    for (auto v : level)
      if (!got.erase(v)) return false;
    remaining -= level.size();
  }
  return got.empty();
}

inline std::vector<std::set<graphfed::VertexId>> adjacency_sets(std::size_t n, const std::vector<graphfed::Edge>& edges) {
  std::vector<std::set<graphfed::VertexId>> adj(n);
  for (auto [u, v] : edges)
    if (u != v) {
      adj[u].insert(v);
      adj[v].insert(u);
    }
  return adj;
}

}  // namespace oracle
