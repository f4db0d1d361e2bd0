#include "graphfed/approx.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "graphfed/error.hpp"

namespace graphfed {

std::size_t nts(double overlap, std::size_t partition_size, std::size_t m) {
  if (m < 2) throw ConfigError("nts: sampling from other partitions needs m >= 2");
  if (!(overlap >= 0.0 && overlap <= 1.0)) throw ConfigError("nts: overlap must lie in [0,1]");
  // The epsilon absorbs representation error such as 0.29 * 100 = 28.999...
  const double exact = overlap * static_cast<double>(partition_size) / static_cast<double>(m - 1);
  return static_cast<std::size_t>(std::floor(exact + 1e-9));
}

double overhead_of(double overlap, std::size_t m) {
  if (m < 1) throw ConfigError("overhead_of: m must be >= 1");
  return overlap / static_cast<double>(m);
}

Rng pair_rng(std::uint64_t seed, PartitionId p, PartitionId op) { return derive_rng(seed, {0xa77, p, op}); }

std::vector<VertexId> sample_from_partition(const Graph& g, const PartitionAssignment& assign, PartitionId p,
                                            PartitionId op, std::size_t quota, Rng& rng, SamplingWork* work) {
  if (p == op) throw ConfigError("sample_from_partition: source and target partition must differ");
  std::vector<VertexId> result;
  if (quota == 0) return result;
  if (work) ++work->sample_calls;

  std::vector<char> seen(g.num_vertices(), 0);
  std::vector<VertexId> frontier = assign.members(p);
  std::uint64_t inspections = 0;
  bool first_level = true;
  while (quota > 0 && !frontier.empty()) {
    if (!first_level && work) ++work->recursive_calls;
    first_level = false;

    std::vector<VertexId> selection;
    for (VertexId v : frontier) {
      auto nb = g.neighbors(v);
      inspections += nb.size();
      for (VertexId u : nb)
        if (assign.assignment[u] == op && !seen[u]) {
          seen[u] = 1;
          selection.push_back(u);
        }
    }
    std::ranges::sort(selection);
    if (selection.size() >= quota) {
      auto picked = sample_without_replacement(std::move(selection), quota, rng);
      result.insert(result.end(), picked.begin(), picked.end());
      break;
    }
    result.insert(result.end(), selection.begin(), selection.end());
    quota -= selection.size();
    frontier = std::move(selection);
  }
  if (work) work->neighbor_inspections += inspections;
  std::ranges::sort(result);
  return result;
}

std::vector<ExtendedPartition> build_extended_partitions(const Dataset& d, const PartitionAssignment& assign,
                                                         const OverlapConfig& cfg, SamplingWork* work) {
  if (!(cfg.overlap >= 0.0 && cfg.overlap <= 1.0)) throw ConfigError("overlap must lie in [0,1]");
  assign.validate(d.num_vertices());
  const std::size_t m = assign.num_partitions;
  std::vector<ExtendedPartition> out(m);
  for (PartitionId p = 0; p < m; ++p) {
    ExtendedPartition& ep = out[p];
    ep.partition_id = p;
    ep.core_vertices = assign.members(p);
    ep.approx_vertices.assign(m, {});
    const std::size_t quota = (m >= 2 && cfg.overlap > 0.0) ? nts(cfg.overlap, ep.core_vertices.size(), m) : 0;
    for (PartitionId op = 0; op < m; ++op) {
      if (op == p || quota == 0) continue;
      Rng rng = pair_rng(cfg.seed, p, op);
      ep.approx_vertices[op] = sample_from_partition(d.graph, assign, p, op, quota, rng, work);
    }

    ep.local_to_global = ep.core_vertices;
    ep.source_partition.assign(ep.core_vertices.size(), p);
    for (PartitionId op = 0; op < m; ++op) {
      ep.local_to_global.insert(ep.local_to_global.end(), ep.approx_vertices[op].begin(),
                                ep.approx_vertices[op].end());
      ep.source_partition.insert(ep.source_partition.end(), ep.approx_vertices[op].size(), op);
    }
    ep.local = subset(d, ep.local_to_global);
  }
  return out;
}

SamplingWork sampling_work(const Graph& g, const PartitionAssignment& assign, const OverlapConfig& cfg) {
  assign.validate(g.num_vertices());
  SamplingWork work;
  const std::size_t m = assign.num_partitions;
  if (m < 2 || cfg.overlap <= 0.0) return work;
  const auto sizes = assign.sizes();
  for (PartitionId p = 0; p < m; ++p) {
    const std::size_t quota = nts(cfg.overlap, sizes[p], m);
    for (PartitionId op = 0; op < m; ++op) {
      if (op == p || quota == 0) continue;
      Rng rng = pair_rng(cfg.seed, p, op);
      sample_from_partition(g, assign, p, op, quota, rng, &work);
    }
  }
  return work;
}

ExtendedPartition full_replica(const Dataset& d, PartitionId id) {
  ExtendedPartition ep;
  ep.partition_id = id;
  ep.core_vertices.resize(d.num_vertices());
  std::iota(ep.core_vertices.begin(), ep.core_vertices.end(), VertexId{0});
  ep.local_to_global = ep.core_vertices;
  ep.source_partition.assign(d.num_vertices(), id);
  ep.local = d;
  return ep;
}

}  // namespace graphfed
