#include "graphfed/datagen.hpp"

#include <cmath>
#include <random>

#include "graphfed/error.hpp"
#include "graphfed/rng.hpp"

namespace graphfed {

void SbmConfig::validate() const {
  if (n == 0 || k == 0) throw ConfigError("sbm: n and k must be positive");
  if (k > n) throw ConfigError("sbm: k must not exceed n");
  if (!(0.0 <= p_out && p_out <= p_in && p_in <= 1.0))
    throw ConfigError("sbm: need 0 <= p_out <= p_in <= 1");
  if (feature_dim < k) throw ConfigError("sbm: feature_dim must be >= k");
  if (!(noise_sigma >= 0.0)) throw ConfigError("sbm: noise_sigma must be >= 0");
  for (double f : {train_fraction, val_fraction, test_fraction})
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("sbm: split fractions must lie in [0,1]");
  if (std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9)
    throw ConfigError("sbm: split fractions must sum to 1");
}

namespace {

// Visits each index of [0, total) independently with probability p using
// geometric skips.
template <typename Fn>
void bernoulli_indices(std::uint64_t total, double p, Rng& rng, Fn&& visit) {
  if (p <= 0.0 || total == 0) return;
  if (p >= 1.0) {
    for (std::uint64_t i = 0; i < total; ++i) visit(i);
    return;
  }
  const double log_q = std::log1p(-p);
  std::uint64_t i = 0;
  while (true) {
    const double u = 1.0 - uniform_real(rng);  // (0, 1]
    const double skip = std::floor(std::log(u) / log_q);
    if (skip >= static_cast<double>(total - i)) return;
    i += static_cast<std::uint64_t>(skip);
    visit(i);
    if (++i >= total) return;
  }
}

}  // namespace

Dataset generate_sbm(const SbmConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.n;
  const std::size_t k = cfg.k;

  std::vector<std::size_t> block_start(k + 1);
  for (std::size_t c = 0; c <= k; ++c) block_start[c] = (c * n + k - 1) / k;

  Dataset d;
  d.labels.num_classes = static_cast<std::uint32_t>(k);
  d.labels.values.resize(n);
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t v = block_start[c]; v < block_start[c + 1]; ++v)
      d.labels.values[v] = static_cast<std::uint32_t>(c);

  Rng edge_rng = derive_rng(cfg.seed, {1});
  std::vector<Edge> edges;
  for (std::size_t a = 0; a < k; ++a) {
    const std::uint64_t a0 = block_start[a], na = block_start[a + 1] - a0;
    // Intra-block pairs i < j enumerated in row-major upper-triangle order.
    const std::uint64_t intra = na * (na - (na > 0 ? 1 : 0)) / 2;
    std::uint64_t row = 0, row_begin = 0;
    bernoulli_indices(intra, cfg.p_in, edge_rng, [&](std::uint64_t idx) {
      while (idx >= row_begin + (na - 1 - row)) {
        row_begin += na - 1 - row;
        ++row;
      }
      const std::uint64_t col = row + 1 + (idx - row_begin);
      edges.emplace_back(static_cast<VertexId>(a0 + row), static_cast<VertexId>(a0 + col));
    });
    for (std::size_t b = a + 1; b < k; ++b) {
      const std::uint64_t b0 = block_start[b], nb = block_start[b + 1] - b0;
      bernoulli_indices(na * nb, cfg.p_out, edge_rng, [&](std::uint64_t idx) {
        edges.emplace_back(static_cast<VertexId>(a0 + idx / nb), static_cast<VertexId>(b0 + idx % nb));
      });
    }
  }
  d.graph = from_edge_list(edges, n);

  Rng feat_rng = derive_rng(cfg.seed, {2});
  std::normal_distribution<double> noise(0.0, 1.0);
  d.features = Matrix(n, cfg.feature_dim);
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t c = d.labels.values[v];
    for (std::size_t j = 0; j < cfg.feature_dim; ++j) {
      const double signal = (j * k / cfg.feature_dim == c) ? 1.0 : 0.0;
      // Stored at f32 precision so a saved features.bin reloads identically.
      d.features(v, j) = static_cast<float>(signal + cfg.noise_sigma * noise(feat_rng));
    }
  }

  Rng split_rng = derive_rng(cfg.seed, {3});
  d.split.roles.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    const double u = uniform_real(split_rng);
    d.split.roles[v] = u < cfg.train_fraction ? Role::kTrain
                       : u < cfg.train_fraction + cfg.val_fraction ? Role::kVal
                                                                   : Role::kTest;
  }
  return d;
}

Dataset delete_training_vertices(const Dataset& d, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("deletion fraction must lie in [0,1]");
  const auto train = d.split.vertices_with(Role::kTrain);
  const auto drop_count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(train.size())));
  Rng rng = derive_rng(seed, {4});
  std::vector<bool> drop(d.num_vertices(), false);
  for (VertexId v : sample_without_replacement(train, drop_count, rng)) drop[v] = true;
  std::vector<VertexId> keep;
  keep.reserve(d.num_vertices() - drop_count);
  for (VertexId v = 0; v < d.num_vertices(); ++v)
    if (!drop[v]) keep.push_back(v);
  return subset(d, keep);
}

}  // namespace graphfed
