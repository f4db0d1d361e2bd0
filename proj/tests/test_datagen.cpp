#include <doctest.h>

#include <cmath>
#include <deque>

#include "graphfed/datagen.hpp"
#include "graphfed/error.hpp"

using namespace graphfed;

namespace {

std::size_t count_components(const Graph& g) {
  std::vector<bool> seen(g.num_vertices(), false);
  std::size_t comps = 0;
  for (VertexId s = 0; s < g.num_vertices(); ++s) {
    if (seen[s]) continue;
    ++comps;
    std::deque<VertexId> q{s};
    seen[s] = true;
    while (!q.empty()) {
      const VertexId v = q.front();
      q.pop_front();
      for (VertexId u : g.neighbors(v))
        if (!seen[u]) {
          seen[u] = true;
          q.push_back(u);
        }
    }
  }
  return comps;
}

}  // namespace

TEST_CASE("sbm with p_in=1, p_out=0 gives cliques") {
  SbmConfig c;
  c.n = 4;
  c.k = 2;
  c.p_in = 1.0;
  c.p_out = 0.0;
  c.feature_dim = 2;
  const Dataset d = generate_sbm(c);
  CHECK(d.labels.values == std::vector<std::uint32_t>{0, 0, 1, 1});
  CHECK(d.graph.edges() == std::vector<Edge>{{0, 1}, {2, 3}});
  d.validate();
}

TEST_CASE("sbm with p_out=0 has at least k components") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SbmConfig c;
    c.n = 300;
    c.k = 6;
    c.p_in = 0.05;
    c.p_out = 0.0;
    c.seed = seed;
    CHECK(count_components(generate_sbm(c).graph) >= c.k);
  }
}

TEST_CASE("sbm edge count is near its binomial expectation") {
  SbmConfig c;
  c.n = 1000;
  c.k = 8;
  c.p_in = 0.02;
  c.p_out = 0.001;
  const double block = 1000.0 / 8.0;
  const double intra_pairs = 8 * block * (block - 1) / 2;
  const double inter_pairs = 1000.0 * 999.0 / 2 - intra_pairs;
  const double mean = intra_pairs * c.p_in + inter_pairs * c.p_out;
  const double sd = std::sqrt(intra_pairs * c.p_in * (1 - c.p_in) + inter_pairs * c.p_out * (1 - c.p_out));
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    c.seed = seed;
    const double e = static_cast<double>(generate_sbm(c).graph.num_edges());
    CHECK(std::abs(e - mean) <= 4 * sd);
  }
}

TEST_CASE("sbm determinism, balance and split") {
  SbmConfig c;
  c.n = 1003;
  c.k = 7;
  c.feature_dim = 14;
  c.seed = 42;
  const Dataset a = generate_sbm(c);
  CHECK(a == generate_sbm(c));
  c.seed = 43;
  CHECK_FALSE(a == generate_sbm(c));

  std::vector<std::size_t> counts(7, 0);
  for (auto l : a.labels.values) ++counts[l];
  const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
  CHECK(*hi - *lo <= 1);

  const double n = 1003.0;
  CHECK(std::abs(a.split.count(Role::kTrain) / n - 0.7) < 0.05);
  CHECK(std::abs(a.split.count(Role::kVal) / n - 0.2) < 0.05);
  CHECK(a.split.count(Role::kTrain) + a.split.count(Role::kVal) + a.split.count(Role::kTest) == 1003);
}

TEST_CASE("sbm features carry the community signal") {
  SbmConfig c;
  c.n = 800;
  c.k = 4;
  c.feature_dim = 8;
  c.noise_sigma = 0.0;
  const Dataset d = generate_sbm(c);
  for (VertexId v = 0; v < d.num_vertices(); ++v)
    for (std::size_t j = 0; j < 8; ++j) CHECK(d.features(v, j) == (j / 2 == d.labels.values[v] ? 1.0 : 0.0));
}

TEST_CASE("sbm config validation") {
  SbmConfig c;
  c.n = 0;
  CHECK_THROWS_AS(generate_sbm(c), ConfigError);
  c = SbmConfig{};
  c.k = 0;
  CHECK_THROWS_AS(generate_sbm(c), ConfigError);
  c = SbmConfig{};
  c.p_out = 0.5;
  CHECK_THROWS_AS(generate_sbm(c), ConfigError);
  c = SbmConfig{};
  c.train_fraction = 0.9;
  CHECK_THROWS_AS(generate_sbm(c), ConfigError);
}

TEST_CASE("delete_training_vertices") {
  SbmConfig c;
  c.n = 500;
  c.k = 5;
  c.p_in = 0.05;
  const Dataset d = generate_sbm(c);
  const std::size_t train = d.split.count(Role::kTrain);

  SUBCASE("fraction 0 leaves the dataset unchanged") { CHECK(delete_training_vertices(d, 0.0, 3) == d); }
  SUBCASE("fraction 1 removes every train vertex") {
    const Dataset r = delete_training_vertices(d, 1.0, 3);
    CHECK(r.split.count(Role::kTrain) == 0);
    CHECK(r.split.count(Role::kTest) == d.split.count(Role::kTest));
    CHECK(r.split.count(Role::kVal) == d.split.count(Role::kVal));
    r.validate();
  }
  SUBCASE("half of 100 train vertices") {
    Dataset small = d;
    std::size_t seen = 0;
    for (auto& role : small.split.roles)
      if (role == Role::kTrain && ++seen > 100) role = Role::kTest;
    CHECK(small.split.count(Role::kTrain) == 100);
    CHECK(delete_training_vertices(small, 0.5, 9).split.count(Role::kTrain) == 50);
  }
  SUBCASE("val and test vertices survive with their edges among themselves") {
    const Dataset r = delete_training_vertices(d, 0.3, 5);
    CHECK(r.split.count(Role::kTrain) == train - static_cast<std::size_t>(std::llround(0.3 * train)));
    CHECK(r.split.count(Role::kTest) == d.split.count(Role::kTest));
    CHECK(r == delete_training_vertices(d, 0.3, 5));
    CHECK(r.graph.num_edges() < d.graph.num_edges());
  }
  SUBCASE("bad fraction") { CHECK_THROWS_AS(delete_training_vertices(d, 1.5, 1), ConfigError); }
}
