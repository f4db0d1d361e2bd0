#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "graphfed/graph.hpp"
#include "graphfed/matrix.hpp"

namespace graphfed {

using FeatureMatrix = Matrix;

struct Labels {
  std::vector<std::uint32_t> values;
  std::uint32_t num_classes = 0;

  friend bool operator==(const Labels&, const Labels&) = default;
};

enum class Role : std::uint8_t { kTrain = 0, kVal = 1, kTest = 2 };

std::string_view role_name(Role r);
Role parse_role(std::string_view s);

struct SplitMask {
  std::vector<Role> roles;

  std::vector<VertexId> vertices_with(Role r) const;
  std::size_t count(Role r) const;

  friend bool operator==(const SplitMask&, const SplitMask&) = default;
};

struct Dataset {
  Graph graph;
  FeatureMatrix features;
  Labels labels;
  SplitMask split;

  std::size_t num_vertices() const { return graph.num_vertices(); }
  // Throws InputError if member sizes disagree or values are out of range.
  void validate() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Induced sub-dataset over `vertices` (local id i = vertices[i]).
Dataset subset(const Dataset& d, std::span<const VertexId> vertices);

}  // namespace graphfed
