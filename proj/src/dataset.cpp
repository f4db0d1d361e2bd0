#include "graphfed/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "graphfed/error.hpp"

namespace graphfed {

std::string_view role_name(Role r) {
  switch (r) {
    case Role::kTrain: return "train";
    case Role::kVal: return "val";
    case Role::kTest: return "test";
  }
  return "?";
}

Role parse_role(std::string_view s) {
  if (s == "train") return Role::kTrain;
  if (s == "val") return Role::kVal;
  if (s == "test") return Role::kTest;
  throw InputError("unknown split role '" + std::string(s) + "'");
}

std::vector<VertexId> SplitMask::vertices_with(Role r) const {
  std::vector<VertexId> out;
  for (std::size_t v = 0; v < roles.size(); ++v)
    if (roles[v] == r) out.push_back(static_cast<VertexId>(v));
  return out;
}

std::size_t SplitMask::count(Role r) const { return static_cast<std::size_t>(std::ranges::count(roles, r)); }

void Dataset::validate() const {
  const std::size_t n = graph.num_vertices();
  if (features.rows() != n) throw InputError("feature rows do not match vertex count");
  if (labels.values.size() != n) throw InputError("label count does not match vertex count");
  if (split.roles.size() != n) throw InputError("split size does not match vertex count");
  for (auto c : labels.values)
    if (c >= labels.num_classes) throw InputError("label id >= num_classes");
  for (double x : features.data())
    if (!std::isfinite(x)) throw InputError("non-finite feature value");
}

Dataset subset(const Dataset& d, std::span<const VertexId> vertices) {
  Dataset out;
  out.graph = induced_subgraph(d.graph, vertices).graph;
  std::vector<std::size_t> rows(vertices.begin(), vertices.end());
  out.features = gather_rows(d.features, rows);
  out.labels.num_classes = d.labels.num_classes;
  out.labels.values.reserve(vertices.size());
  out.split.roles.reserve(vertices.size());
  for (VertexId v : vertices) {
    out.labels.values.push_back(d.labels.values[v]);
    out.split.roles.push_back(d.split.roles[v]);
  }
  return out;
}

}  // namespace graphfed
