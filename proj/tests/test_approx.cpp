#include <doctest.h>

#include <cmath>
#include <random>

#include "graphfed/approx.hpp"
#include "graphfed/datagen.hpp"
#include "graphfed/error.hpp"
#include "oracles.hpp"

using namespace graphfed;

namespace {

std::set<VertexId> members_set(const PartitionAssignment& a, PartitionId p) {
  const auto m = a.members(p);
  return {m.begin(), m.end()};
}

}  // namespace

TEST_CASE("nts") {
  CHECK(nts(0.10, 1000, 5) == 25);
  CHECK(nts(0.0, 1234, 7) == 0);
  CHECK(nts(0.10, 100, 3) == 5);
  CHECK(nts(0.29, 100, 2) == 29);
  CHECK(nts(1.0, 7, 2) == 7);
  CHECK_THROWS_AS(nts(0.1, 100, 1), ConfigError);
  CHECK_THROWS_AS(nts(1.5, 100, 3), ConfigError);
}

TEST_CASE("overhead_of") {
  CHECK(overhead_of(0.10, 5) == doctest::Approx(0.02));
  CHECK(std::round(overhead_of(0.10, 3) * 1e4) / 1e4 == doctest::Approx(0.0333));
  CHECK(overhead_of(0.0, 4) == 0.0);
  CHECK(overhead_of(0.25, 5) == doctest::Approx(0.05));
  CHECK(overhead_of(0.50, 5) == doctest::Approx(0.10));
}

TEST_CASE("sampling on the chain example") {
  const std::vector<Edge> e{{0, 1}, {1, 2}, {2, 3}, {3, 4}};
  const Graph g = from_edge_list(e, 5);
  const PartitionAssignment a{{0, 0, 1, 1, 1}, 2};
  Rng rng = pair_rng(1, 0, 1);
  CHECK(sample_from_partition(g, a, 0, 1, 2, rng) == std::vector<VertexId>{2, 3});
  CHECK(sample_from_partition(g, a, 0, 1, 1, rng) == std::vector<VertexId>{2});
  CHECK(sample_from_partition(g, a, 0, 1, 0, rng).empty());
  CHECK(sample_from_partition(g, a, 0, 1, 10, rng) == std::vector<VertexId>{2, 3, 4});
  CHECK_THROWS_AS(sample_from_partition(g, a, 1, 1, 1, rng), ConfigError);
}

TEST_CASE("sampling agrees with plain BFS levels") {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 4 + gen() % 30;
    const std::size_t m = 2 + gen() % 3;
    const auto edges = oracle::random_edges(n, 0.05 + 0.3 * (gen() % 100) / 100.0, gen);
    const Graph g = from_edge_list(edges, n);
    PartitionAssignment a{std::vector<PartitionId>(n), static_cast<std::uint32_t>(m)};
    for (auto& x : a.assignment) x = gen() % m;
    const auto adj = oracle::adjacency_sets(n, edges);
    for (PartitionId p = 0; p < m; ++p)
      for (PartitionId op = 0; op < m; ++op) {
        if (p == op) continue;
        const std::size_t quota = gen() % 8;
        Rng rng = pair_rng(trial, p, op);
        const auto got = sample_from_partition(g, a, p, op, quota, rng);
        CHECK(std::is_sorted(got.begin(), got.end()));
        CHECK(got.size() <= quota);
        const auto levels = oracle::bfs_levels(adj, members_set(a, p), members_set(a, op));
        CHECK(oracle::matches_levels(levels, quota, got));
        const std::set<VertexId> got_set(got.begin(), got.end());
        CHECK(oracle::all_reachable_through(adj, members_set(a, p), members_set(a, op), got_set));
      }
  }
}

TEST_CASE("sampling is uniform within the cut level") {
  // Star: vertex 0 in p, leaves 1..4 in op; quota 2 of 4 leaves.
  const std::vector<Edge> e{{0, 1}, {0, 2}, {0, 3}, {0, 4}};
  const Graph g = from_edge_list(e, 5);
  const PartitionAssignment a{{0, 1, 1, 1, 1}, 2};
  std::vector<int> hits(5, 0);
  const int trials = 4000;
  for (int t = 0; t < trials; ++t) {
    Rng rng = pair_rng(t, 0, 1);
    for (VertexId v : sample_from_partition(g, a, 0, 1, 2, rng)) ++hits[v];
  }
  for (VertexId v = 1; v <= 4; ++v) CHECK(std::abs(hits[v] / double(trials) - 0.5) < 0.05);
}

TEST_CASE("extended partitions") {
  SbmConfig c;
  c.n = 300;
  c.k = 3;
  c.p_in = 0.05;
  c.p_out = 0.01;
  c.feature_dim = 6;
  const Dataset d = generate_sbm(c);
  PartitionAssignment a{std::vector<PartitionId>(300), 3};
  for (VertexId v = 0; v < 300; ++v) a.assignment[v] = v % 3;

  SUBCASE("O=0 is the induced core") {
    const auto eps = build_extended_partitions(d, a, {0.0, 1});
    for (PartitionId p = 0; p < 3; ++p) {
      CHECK(eps[p].num_approx() == 0);
      CHECK(eps[p].local == subset(d, a.members(p)));
    }
    CHECK(sampling_work(d.graph, a, {0.0, 1}).neighbor_inspections == 0);
  }
  SUBCASE("O=0.25 invariants") {
    const OverlapConfig cfg{0.25, 9};
    const auto eps = build_extended_partitions(d, a, cfg);
    CHECK(eps.size() == 3);
    for (PartitionId p = 0; p < 3; ++p) {
      const auto& ep = eps[p];
      const std::size_t q = nts(0.25, ep.num_core(), 3);
      CHECK(ep.num_approx() <= static_cast<std::size_t>(std::ceil(0.25 * ep.num_core())));
      CHECK(ep.local.num_vertices() == ep.local_to_global.size());
      for (PartitionId op = 0; op < 3; ++op) {
        if (op == p) {
          CHECK(ep.approx_vertices[op].empty());
          continue;
        }
        CHECK(ep.approx_vertices[op].size() == q);
        for (VertexId v : ep.approx_vertices[op]) CHECK(a.assignment[v] == op);
      }
      for (std::size_t i = 0; i < ep.local_to_global.size(); ++i) {
        const VertexId gid = ep.local_to_global[i];
        CHECK(ep.source_partition[i] == a.assignment[gid]);
        CHECK(ep.is_core(static_cast<VertexId>(i)) == (i < ep.num_core()));
        CHECK(ep.local.labels.values[i] == d.labels.values[gid]);
        CHECK(ep.local.split.roles[i] == d.split.roles[gid]);
      }
      for (auto [u, v] : ep.local.graph.edges()) CHECK(d.graph.has_edge(ep.local_to_global[u], ep.local_to_global[v]));
    }
    const auto again = build_extended_partitions(d, a, cfg);
    for (PartitionId p = 0; p < 3; ++p) CHECK(again[p].local_to_global == eps[p].local_to_global);
  }
  SUBCASE("unreachable partition contributes nothing") {
    const std::vector<Edge> e{{0, 1}, {2, 3}};
    Dataset tiny = subset(d, std::vector<VertexId>{0, 1, 2, 3});
    tiny.graph = from_edge_list(e, 4);
    const PartitionAssignment two{{0, 0, 1, 1}, 2};
    const auto eps = build_extended_partitions(tiny, two, {1.0, 1});
    CHECK(eps[0].approx_vertices[1].empty());
    CHECK(eps[1].approx_vertices[0].empty());
  }
}

TEST_CASE("fully reachable partitions gain exactly (M-1) * nts vertices") {
  // Complete graph on 500 vertices, 5 partitions of 100.
  std::vector<Edge> e;
  for (VertexId u = 0; u < 500; ++u)
    for (VertexId v = u + 1; v < 500; ++v) e.emplace_back(u, v);
  const Graph g = from_edge_list(e, 500);
  PartitionAssignment a{std::vector<PartitionId>(500), 5};
  for (VertexId v = 0; v < 500; ++v) a.assignment[v] = v / 100;
  for (double o : {0.10, 0.25, 0.50}) {
    SamplingWork work;
    for (PartitionId p = 0; p < 5; ++p) {
      std::size_t added = 0;
      for (PartitionId op = 0; op < 5; ++op) {
        if (op == p) continue;
        Rng rng = pair_rng(1, p, op);
        added += sample_from_partition(g, a, p, op, nts(o, 100, 5), rng, &work).size();
      }
      CHECK(added == 4 * nts(o, 100, 5));
    }
    CHECK(work.recursive_calls == 0);
  }
}
