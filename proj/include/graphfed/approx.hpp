#pragma once

#include <cstdint>
#include <vector>

#include "graphfed/dataset.hpp"
#include "graphfed/partition.hpp"
#include "graphfed/rng.hpp"

namespace graphfed {

struct OverlapConfig {
  double overlap = 0.0;  // O in [0, 1]
  std::uint64_t seed = 0;
};

/// A partition's own vertices plus the vertices sampled from every other
/// partition, with everything restricted to the induced local graph.
struct ExtendedPartition {
  PartitionId partition_id = 0;
  std::vector<VertexId> core_vertices;
  // approx_vertices[op]: sampled from partition op (empty for op == partition_id).
  std::vector<std::vector<VertexId>> approx_vertices;

  // Local vertex i is global vertex local_to_global[i]. Core vertices come
  // first in ascending order, then approximated vertices grouped by source.
  std::vector<VertexId> local_to_global;
  std::vector<PartitionId> source_partition;
  Dataset local;

  bool is_core(VertexId local_id) const { return source_partition[local_id] == partition_id; }
  std::size_t num_core() const { return core_vertices.size(); }
  std::size_t num_approx() const { return local_to_global.size() - core_vertices.size(); }
};

/// Instrumentation for the sampling pass.
struct SamplingWork {
  std::uint64_t neighbor_inspections = 0;  // adjacency entries examined
  std::uint64_t sample_calls = 0;          // top-level sample(p, op) invocations
  std::uint64_t recursive_calls = 0;       // next-hop expansions

  SamplingWork& operator+=(const SamplingWork& o) {
    neighbor_inspections += o.neighbor_inspections;
    sample_calls += o.sample_calls;
    recursive_calls += o.recursive_calls;
    return *this;
  }
};

/// Number of vertices to draw from each other partition:
/// floor(overlap * partition_size / (m - 1)). Throws ConfigError for m < 2.
std::size_t nts(double overlap, std::size_t partition_size, std::size_t m);

/// Added vertices as a fraction of all graph vertices: overlap / m.
double overhead_of(double overlap, std::size_t m);

/// Breadth-first random sampling of at most `quota` vertices of partition
/// `op`, starting from the one-hop neighbors of partition `p`. A hop level
/// that fits the remaining quota is taken whole and the search continues
/// from it inside `op`; the first level that does not fit is sampled
/// uniformly without replacement. Returned ids are ascending.
std::vector<VertexId> sample_from_partition(const Graph& g, const PartitionAssignment& assign, PartitionId p,
                                            PartitionId op, std::size_t quota, Rng& rng,
                                            SamplingWork* work = nullptr);

/// The RNG stream used for the (p, op) draw.
Rng pair_rng(std::uint64_t seed, PartitionId p, PartitionId op);

std::vector<ExtendedPartition> build_extended_partitions(const Dataset& d, const PartitionAssignment& assign,
                                                         const OverlapConfig& cfg,
                                                         SamplingWork* work = nullptr);

/// Runs the sampling pass of build_extended_partitions and reports its cost.
SamplingWork sampling_work(const Graph& g, const PartitionAssignment& assign, const OverlapConfig& cfg);

/// Extended partition whose core is the given whole dataset (no sampling);
/// used to give every worker a full replica.
ExtendedPartition full_replica(const Dataset& d, PartitionId id);

}  // namespace graphfed
