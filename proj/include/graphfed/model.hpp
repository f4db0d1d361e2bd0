#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "graphfed/dataset.hpp"
#include "graphfed/graph.hpp"
#include "graphfed/matrix.hpp"
#include "graphfed/rng.hpp"

namespace graphfed {

enum class ModelKind : std::uint8_t { kKwGcn = 0, kGraphSage = 1 };

std::string_view model_kind_name(ModelKind k);
ModelKind parse_model_kind(std::string_view s);

struct ModelConfig {
  ModelKind kind = ModelKind::kKwGcn;
  std::size_t num_layers = 2;
  std::size_t hidden_dim = 128;
  double learning_rate = 0.02;
  // GraphSAGE only.
  std::size_t batch_size = 256;
  std::vector<std::size_t> neighbor_samples{10, 10};  // bottom layer first

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// One weight matrix per layer, layer l mapping in_dim x out_dim.
struct ModelParams {
  std::vector<Matrix> weights;

  bool same_shape(const ModelParams& o) const;
  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

ModelParams zeros_like(const ModelParams& p);
double max_abs_diff(const ModelParams& a, const ModelParams& b);
/// Rounds every entry to the nearest float so the parameters survive the
/// f32 checkpoint/wire format unchanged.
void round_to_f32(ModelParams& p);

struct AdamState {
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  ModelParams first_moment;
  ModelParams second_moment;
  std::uint64_t step = 0;

  static AdamState for_params(const ModelParams& p);
  friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// Glorot-uniform layers: F x H, H x C (two layers) or F x C (one layer).
ModelParams init_params(const ModelConfig& cfg, std::size_t feature_dim, std::size_t num_classes,
                        std::uint64_t seed);

/// Per-layer record of a forward pass. For layer l (1-based):
/// aggregated[l-1] = P_l * h[l-1], pre[l-1] = aggregated[l-1] * W_l,
/// h[l] = ReLU(pre[l-1]) for hidden layers and h[L] = pre[L-1] (logits).
struct Activations {
  std::vector<Matrix> h;
  std::vector<Matrix> aggregated;
  std::vector<Matrix> pre;

  const Matrix& logits() const { return h.back(); }
};

// Layer-wise propagation with one sparse operator per layer.
Activations propagate_forward(std::span<const SparseMatrix> ops, const Matrix& x, const ModelParams& p);
ModelParams propagate_backward(std::span<const SparseMatrix> ops, const Activations& act, const ModelParams& p,
                               const Matrix& grad_logits, bool symmetric_ops);

/// H^l = sigma(A_hat H^{l-1} W^l), ReLU on hidden layers, raw logits out.
Activations kw_forward(const NormalizedAdjacency& a_hat, const Matrix& x, const ModelParams& p);
ModelParams kw_backward(const Activations& act, const NormalizedAdjacency& a_hat, const ModelParams& p,
                        const Matrix& grad_logits);

/// Sampled computation graph for a GraphSAGE minibatch. ops[0] is the
/// bottom layer; it maps input_vertices (rows of H^0) onto the next layer's
/// vertex list. The last op's rows are the batch, in batch order.
struct SageBlocks {
  std::vector<SparseMatrix> ops;
  std::vector<VertexId> input_vertices;
  std::vector<VertexId> batch;
};

/// Each target averages itself with neighbor_samples[l] neighbors drawn
/// uniformly with replacement; targets without neighbors average only themselves.
SageBlocks sample_sage_blocks(const Graph& g, std::span<const std::size_t> neighbor_samples,
                              std::size_t num_layers, Rng& rng, std::span<const VertexId> batch);
/// Deterministic all-neighbor blocks over every vertex of g.
SageBlocks full_sage_blocks(const Graph& g, std::size_t num_layers);

struct SageForward {
  SageBlocks blocks;
  Activations act;

  const Matrix& logits() const { return act.logits(); }
};

SageForward sage_forward(const Graph& g, const Matrix& x, const ModelParams& p, const ModelConfig& cfg, Rng& rng,
                         std::span<const VertexId> batch);
SageForward sage_forward_blocks(SageBlocks blocks, const Matrix& x, const ModelParams& p);
ModelParams sage_backward(const SageForward& fwd, const ModelParams& p, const Matrix& grad_logits);

struct LossResult {
  double loss = 0.0;
  Matrix grad_logits;  // zero on unselected rows
};

/// Row-wise softmax with max subtraction.
Matrix softmax(const Matrix& logits);

/// Mean cross-entropy over `rows`. Throws InputError when rows is empty.
LossResult cross_entropy_loss(const Matrix& logits, std::span<const std::uint32_t> labels,
                              std::span<const std::size_t> rows);

/// Bias-corrected Adam update, in place.
void adam_step(ModelParams& p, const ModelParams& grad, AdamState& s, double learning_rate);

std::vector<std::uint32_t> argmax_rows(const Matrix& logits);

/// Micro-averaged F1 over the selected rows from pooled TP/FP/FN counts.
double micro_f1(std::span<const std::uint32_t> predictions, std::span<const std::uint32_t> labels,
                std::span<const std::size_t> rows);

}  // namespace graphfed
