#pragma once

#include <cstdint>

#include "graphfed/dataset.hpp"

namespace graphfed {

/// Stochastic block model with noisy one-hot community features.
struct SbmConfig {
  std::size_t n = 2000;
  std::size_t k = 8;
  double p_in = 0.01;
  double p_out = 0.001;
  std::size_t feature_dim = 16;
  double noise_sigma = 1.0;
  double train_fraction = 0.7;
  double val_fraction = 0.2;
  double test_fraction = 0.1;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Community of v is floor(v * k / n); features put 1.0 on the block of
/// dimensions owned by the community, plus N(0, noise_sigma^2) noise.
Dataset generate_sbm(const SbmConfig& cfg);

/// Removes round(fraction * |train|) uniformly chosen training vertices and
/// their incident edges. Val/test vertices are never touched.
Dataset delete_training_vertices(const Dataset& d, double fraction, std::uint64_t seed);

}  // namespace graphfed
