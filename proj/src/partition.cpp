#include "graphfed/partition.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <string>

#include "graphfed/error.hpp"
#include "graphfed/rng.hpp"

namespace graphfed {

namespace {
constexpr PartitionId kUnassigned = static_cast<PartitionId>(-1);

bool balanced(const std::vector<std::size_t>& sizes, std::size_t slack) {
  auto [lo, hi] = std::ranges::minmax(sizes);
  return hi - lo <= slack;
}
// First seed uniform; every further seed is drawn uniformly among the
// vertices farthest (in hops) from the seeds chosen so far, unreachable
// vertices counting as farthest.
std::vector<VertexId> spread_seeds(const Graph& g, std::size_t m, std::uint64_t seed) {
  const std::size_t n = g.num_vertices();
  constexpr std::size_t kInf = static_cast<std::size_t>(-1);
  Rng rng = derive_rng(seed, {0x9a7});
  std::vector<VertexId> seeds{static_cast<VertexId>(uniform_index(rng, n))};
  std::vector<std::size_t> dist(n, kInf);
  std::deque<VertexId> queue;
  auto relax_from = [&](VertexId s) {
    dist[s] = 0;
    queue.push_back(s);
    while (!queue.empty()) {
      const VertexId v = queue.front();
      queue.pop_front();
      for (VertexId u : g.neighbors(v))
        if (dist[u] == kInf || dist[u] > dist[v] + 1) {
          dist[u] = dist[v] + 1;
          queue.push_back(u);
        }
    }
  };
  relax_from(seeds[0]);
  while (seeds.size() < m) {
    const std::size_t far = *std::ranges::max_element(dist);
    std::vector<VertexId> candidates;
    for (std::size_t v = 0; v < n; ++v)
      if (dist[v] == far) candidates.push_back(static_cast<VertexId>(v));
    seeds.push_back(candidates[uniform_index(rng, candidates.size())]);
    relax_from(seeds.back());
  }
  return seeds;
}

}  // namespace

std::vector<std::size_t> PartitionAssignment::sizes() const {
  std::vector<std::size_t> out(num_partitions, 0);
  for (auto p : assignment)
    if (p < num_partitions) ++out[p];
  return out;
}

std::vector<VertexId> PartitionAssignment::members(PartitionId p) const {
  std::vector<VertexId> out;
  for (std::size_t v = 0; v < assignment.size(); ++v)
    if (assignment[v] == p) out.push_back(static_cast<VertexId>(v));
  return out;
}

void PartitionAssignment::validate(std::size_t num_vertices) const {
  if (assignment.size() != num_vertices)
    throw InputError("partition assignment covers " + std::to_string(assignment.size()) +
                     " vertices, expected " + std::to_string(num_vertices));
  if (num_partitions == 0) throw InputError("partition assignment has zero partitions");
  for (auto p : assignment)
    if (p >= num_partitions)
      throw InputError("partition id " + std::to_string(p) + " >= " + std::to_string(num_partitions));
  const auto s = sizes();
  for (std::size_t p = 0; p < s.size(); ++p)
    if (s[p] == 0) throw InputError("partition " + std::to_string(p) + " is empty");
}

std::size_t default_balance_slack(std::size_t num_vertices, std::size_t num_partitions) {
  if (num_partitions == 0) return 0;
  return static_cast<std::size_t>(
      std::ceil(0.02 * static_cast<double>(num_vertices) / static_cast<double>(num_partitions)));
}

PartitionAssignment partition_bfs_balanced(const Graph& g, std::size_t m, std::uint64_t seed,
                                           std::optional<std::size_t> balance_slack) {
  const std::size_t n = g.num_vertices();
  if (m == 0) throw ConfigError("partition count must be >= 1");
  if (m > n) throw ConfigError("partition count " + std::to_string(m) + " exceeds vertex count " + std::to_string(n));

  PartitionAssignment out;
  out.num_partitions = static_cast<std::uint32_t>(m);
  out.assignment.assign(n, kUnassigned);

  const auto seeds = spread_seeds(g, m, seed);

  std::vector<std::deque<VertexId>> frontier(m);
  std::vector<std::size_t> size(m, 0);
  auto claim = [&](VertexId v, std::size_t p) {
    out.assignment[v] = static_cast<PartitionId>(p);
    ++size[p];
    for (VertexId u : g.neighbors(v))
      if (out.assignment[u] == kUnassigned) frontier[p].push_back(u);
  };
  for (std::size_t p = 0; p < m; ++p) claim(seeds[p], p);

  std::size_t assigned = m;
  std::size_t next_free = 0;
  while (assigned < n) {
    // Smallest region, lowest id on ties.
    std::size_t p = 0;
    for (std::size_t q = 1; q < m; ++q)
      if (size[q] < size[p]) p = q;
    while (!frontier[p].empty() && out.assignment[frontier[p].front()] != kUnassigned) frontier[p].pop_front();
    VertexId v;
    if (!frontier[p].empty()) {
      v = frontier[p].front();
      frontier[p].pop_front();
    } else {
      // Region is enclosed; restart it from the lowest unassigned vertex.
      while (out.assignment[next_free] != kUnassigned) ++next_free;
      v = static_cast<VertexId>(next_free);
    }
    claim(v, p);
    ++assigned;
  }

  refine_boundary(g, out, balance_slack.value_or(default_balance_slack(n, m)));
  return out;
}

std::size_t refine_boundary(const Graph& g, PartitionAssignment& p, std::size_t balance_slack) {
  const std::size_t m = p.num_partitions;
  auto sizes = p.sizes();
  std::vector<std::size_t> links(m);
  std::size_t moves = 0;
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    const PartitionId own = p.assignment[v];
    if (sizes[own] <= 1) continue;
    std::ranges::fill(links, 0);
    for (VertexId u : g.neighbors(v)) ++links[p.assignment[u]];
    std::size_t best = own;
    std::size_t best_links = links[own];
    for (std::size_t q = 0; q < m; ++q) {
      if (q == own || links[q] <= best_links) continue;
      --sizes[own];
      ++sizes[q];
      if (balanced(sizes, balance_slack)) {
        best = q;
        best_links = links[q];
      }
      ++sizes[own];
      --sizes[q];
    }
    if (best != own) {
      --sizes[own];
      ++sizes[best];
      p.assignment[v] = static_cast<PartitionId>(best);
      ++moves;
    }
  }
  return moves;
}

PartitionStats cut_stats(const Graph& g, const PartitionAssignment& p) {
  p.validate(g.num_vertices());
  const std::size_t m = p.num_partitions;
  PartitionStats s;
  s.partition_sizes = p.sizes();
  s.cross_edges.assign(m, std::vector<std::size_t>(m, 0));
  for (auto [u, v] : g.edges()) {
    const auto a = p.assignment[u], b = p.assignment[v];
    if (a == b) continue;
    ++s.cut_edges;
    ++s.cross_edges[a][b];
    ++s.cross_edges[b][a];
  }
  const std::size_t n = g.num_vertices();
  s.avg_vertex_degree = n ? 2.0 * static_cast<double>(g.num_edges()) / static_cast<double>(n) : 0.0;
  s.avg_cross_edges =
      m >= 2 ? static_cast<double>(s.cut_edges) / (static_cast<double>(m * (m - 1)) / 2.0) : 0.0;
  return s;
}

PartitionAssignment load_partition_file(const std::filesystem::path& path, std::size_t num_vertices,
                                        std::optional<std::uint32_t> num_partitions) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open partition file " + path.string());
  PartitionAssignment out;
  std::string line;
  std::size_t lineno = 0;
  std::uint32_t max_id = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) throw InputError("partition file line " + std::to_string(lineno) + " is empty");
    std::size_t used = 0;
    unsigned long id = 0;
    try {
      id = std::stoul(line, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != line.size() || line[0] == '-')
      throw InputError("partition file line " + std::to_string(lineno) + ": not a partition id");
    out.assignment.push_back(static_cast<PartitionId>(id));
    max_id = std::max(max_id, out.assignment.back());
  }
  if (out.assignment.size() != num_vertices)
    throw InputError("partition file has " + std::to_string(out.assignment.size()) + " lines, expected " +
                     std::to_string(num_vertices));
  out.num_partitions = num_partitions.value_or(out.assignment.empty() ? 0 : max_id + 1);
  out.validate(num_vertices);
  return out;
}

void save_partition_file(const std::filesystem::path& path, const PartitionAssignment& p) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write partition file " + path.string());
  for (auto id : p.assignment) out << id << '\n';
}

}  // namespace graphfed
