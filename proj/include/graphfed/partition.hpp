#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "graphfed/graph.hpp"

namespace graphfed {

using PartitionId = std::uint32_t;

struct PartitionAssignment {
  std::vector<PartitionId> assignment;
  std::uint32_t num_partitions = 0;

  std::vector<std::size_t> sizes() const;
  // Vertices of partition p in ascending id order.
  std::vector<VertexId> members(PartitionId p) const;
  // Throws InputError on length mismatch, out-of-range ids or empty partitions.
  void validate(std::size_t num_vertices) const;

  friend bool operator==(const PartitionAssignment&, const PartitionAssignment&) = default;
};

struct PartitionStats {
  std::size_t cut_edges = 0;
  std::vector<std::size_t> partition_sizes;
  double avg_vertex_degree = 0.0;
  // Mean number of direct edges per unordered partition pair.
  double avg_cross_edges = 0.0;
  // cross_edges[p][q]: undirected edges between p and q (symmetric, zero diagonal).
  std::vector<std::vector<std::size_t>> cross_edges;
};

/// Default balance slack: ceil(0.02 * N / M).
std::size_t default_balance_slack(std::size_t num_vertices, std::size_t num_partitions);

/// Grows m regions breadth-first from spread-out seeds, always extending
/// the smallest region (lowest id on ties), then runs one greedy boundary
/// refinement pass that only applies cut-reducing moves within the slack.
PartitionAssignment partition_bfs_balanced(const Graph& g, std::size_t m, std::uint64_t seed,
                                           std::optional<std::size_t> balance_slack = std::nullopt);

/// The refinement pass on its own; returns the number of moves applied.
std::size_t refine_boundary(const Graph& g, PartitionAssignment& p, std::size_t balance_slack);

PartitionStats cut_stats(const Graph& g, const PartitionAssignment& p);

/// One decimal partition id per line, line i = vertex i. When
/// `num_partitions` is absent it is taken as max id + 1.
PartitionAssignment load_partition_file(const std::filesystem::path& path, std::size_t num_vertices,
                                        std::optional<std::uint32_t> num_partitions = std::nullopt);
void save_partition_file(const std::filesystem::path& path, const PartitionAssignment& p);

}  // namespace graphfed
