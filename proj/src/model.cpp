#include "graphfed/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <unordered_map>

#include "graphfed/error.hpp"

namespace graphfed {

std::string_view model_kind_name(ModelKind k) { return k == ModelKind::kKwGcn ? "kw_gcn" : "graphsage"; }

ModelKind parse_model_kind(std::string_view s) {
  if (s == "kw_gcn" || s == "kw-gcn" || s == "kw") return ModelKind::kKwGcn;
  if (s == "graphsage" || s == "sage" || s == "gs") return ModelKind::kGraphSage;
  throw ConfigError("unknown model kind '" + std::string(s) + "'");
}

void ModelConfig::validate() const {
  if (num_layers != 1 && num_layers != 2) throw ConfigError("num_layers must be 1 or 2");
  if (hidden_dim == 0) throw ConfigError("hidden_dim must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (kind == ModelKind::kGraphSage) {
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
    if (neighbor_samples.size() < num_layers) throw ConfigError("need one neighbor sample count per layer");
  }
}

bool ModelParams::same_shape(const ModelParams& o) const {
  if (weights.size() != o.weights.size()) return false;
  for (std::size_t i = 0; i < weights.size(); ++i)
    if (!weights[i].same_shape(o.weights[i])) return false;
  return true;
}

ModelParams zeros_like(const ModelParams& p) {
  ModelParams z;
  for (const auto& w : p.weights) z.weights.emplace_back(w.rows(), w.cols());
  return z;
}

double max_abs_diff(const ModelParams& a, const ModelParams& b) {
  if (!a.same_shape(b)) throw InputError("parameter shapes differ");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.weights.size(); ++i) worst = std::max(worst, max_abs_diff(a.weights[i], b.weights[i]));
  return worst;
}

void round_to_f32(ModelParams& p) {
  for (auto& w : p.weights)
    for (double& x : w.data()) x = static_cast<double>(static_cast<float>(x));
}

AdamState AdamState::for_params(const ModelParams& p) {
  return AdamState{zeros_like(p), zeros_like(p), 0};
}

ModelParams init_params(const ModelConfig& cfg, std::size_t feature_dim, std::size_t num_classes,
                        std::uint64_t seed) {
  cfg.validate();
  if (feature_dim == 0 || num_classes == 0) throw ConfigError("init_params: dimensions must be positive");
  std::vector<std::size_t> dims{feature_dim};
  if (cfg.num_layers == 2) dims.push_back(cfg.hidden_dim);
  dims.push_back(num_classes);

  ModelParams p;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::size_t fan_in = dims[l], fan_out = dims[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Rng rng = derive_rng(seed, {0x1417, l});
    Matrix w(fan_in, fan_out);
    for (double& x : w.data()) x = bound * (2.0 * uniform_real(rng) - 1.0);
    p.weights.push_back(std::move(w));
  }
  round_to_f32(p);
  return p;
}

Activations propagate_forward(std::span<const SparseMatrix> ops, const Matrix& x, const ModelParams& p) {
  const std::size_t layers = p.weights.size();
  if (ops.size() != layers) throw InputError("forward: one propagation operator per layer required");
  Activations act;
  act.h.push_back(x);
  for (std::size_t l = 0; l < layers; ++l) {
    const Matrix& w = p.weights[l];
    if (act.h.back().cols() != w.rows()) throw InputError("forward: feature width does not match weights");
    act.aggregated.push_back(spmm(ops[l], act.h.back()));
    act.pre.push_back(matmul(act.aggregated.back(), w));
    Matrix out = act.pre.back();
    if (l + 1 < layers) relu_inplace(out);
    act.h.push_back(std::move(out));
  }
  return act;
}

ModelParams propagate_backward(std::span<const SparseMatrix> ops, const Activations& act, const ModelParams& p,
                               const Matrix& grad_logits, bool symmetric_ops) {
  const std::size_t layers = p.weights.size();
  if (!grad_logits.same_shape(act.logits())) throw InputError("backward: gradient shape differs from logits");
  ModelParams grads = zeros_like(p);
  Matrix dz = grad_logits;
  for (std::size_t l = layers; l-- > 0;) {
    grads.weights[l] = matmul_tn(act.aggregated[l], dz);
    if (l == 0) break;
    const Matrix d_agg = matmul_nt(dz, p.weights[l]);
    Matrix dh = symmetric_ops ? spmm(ops[l], d_agg) : spmm_transposed(ops[l], d_agg);
    relu_backward_inplace(dh, act.pre[l - 1]);
    dz = std::move(dh);
  }
  return grads;
}

namespace {
std::vector<SparseMatrix> repeat(const SparseMatrix& a, std::size_t n) { return std::vector<SparseMatrix>(n, a); }
}  // namespace

Activations kw_forward(const NormalizedAdjacency& a_hat, const Matrix& x, const ModelParams& p) {
  if (a_hat.cols != x.rows()) throw InputError("kw_forward: adjacency and feature rows differ");
  const auto ops = repeat(a_hat, p.weights.size());
  return propagate_forward(ops, x, p);
}

ModelParams kw_backward(const Activations& act, const NormalizedAdjacency& a_hat, const ModelParams& p,
                        const Matrix& grad_logits) {
  const auto ops = repeat(a_hat, p.weights.size());
  return propagate_backward(ops, act, p, grad_logits, /*symmetric_ops=*/true);
}

SageBlocks sample_sage_blocks(const Graph& g, std::span<const std::size_t> neighbor_samples,
                              std::size_t num_layers, Rng& rng, std::span<const VertexId> batch) {
  if (batch.empty()) throw InputError("sage: empty batch");
  if (neighbor_samples.size() < num_layers) throw ConfigError("sage: need one sample count per layer");
  SageBlocks blocks;
  blocks.batch.assign(batch.begin(), batch.end());
  std::vector<VertexId> targets = blocks.batch;
  std::vector<SparseMatrix> top_down;
  for (std::size_t l = num_layers; l-- > 0;) {
    std::vector<VertexId> sources = targets;
    std::unordered_map<VertexId, VertexId> position;
    for (std::size_t i = 0; i < sources.size(); ++i) {
      if (sources[i] >= g.num_vertices()) throw InputError("sage: batch vertex out of range");
      if (!position.emplace(sources[i], static_cast<VertexId>(i)).second)
        throw InputError("sage: repeated vertex in batch");
    }
    auto index_of = [&](VertexId v) {
      auto [it, fresh] = position.emplace(v, static_cast<VertexId>(sources.size()));
      if (fresh) sources.push_back(v);
      return it->second;
    };

    SparseMatrix op;
    op.rows = targets.size();
    const std::size_t samples = neighbor_samples[l];
    for (std::size_t t = 0; t < targets.size(); ++t) {
      const VertexId v = targets[t];
      auto nb = g.neighbors(v);
      std::map<VertexId, double> row;
      const std::size_t drawn = nb.empty() ? 0 : samples;
      const double w = 1.0 / static_cast<double>(1 + drawn);
      row[static_cast<VertexId>(t)] += w;
      for (std::size_t s = 0; s < drawn; ++s) row[index_of(nb[uniform_index(rng, nb.size())])] += w;
      for (auto [col, val] : row) {
        op.indices.push_back(col);
        op.values.push_back(val);
      }
      op.offsets.push_back(op.indices.size());
    }
    op.cols = sources.size();
    top_down.push_back(std::move(op));
    targets = std::move(sources);
  }
  blocks.input_vertices = std::move(targets);
  blocks.ops.assign(top_down.rbegin(), top_down.rend());
  return blocks;
}

SageBlocks full_sage_blocks(const Graph& g, std::size_t num_layers) {
  SageBlocks blocks;
  blocks.ops = repeat(mean_adjacency(g), num_layers);
  blocks.input_vertices.resize(g.num_vertices());
  for (std::size_t v = 0; v < g.num_vertices(); ++v) blocks.input_vertices[v] = static_cast<VertexId>(v);
  blocks.batch = blocks.input_vertices;
  return blocks;
}

SageForward sage_forward_blocks(SageBlocks blocks, const Matrix& x, const ModelParams& p) {
  std::vector<std::size_t> rows(blocks.input_vertices.begin(), blocks.input_vertices.end());
  Matrix h0 = gather_rows(x, rows);
  SageForward out{std::move(blocks), {}};
  out.act = propagate_forward(out.blocks.ops, h0, p);
  return out;
}

SageForward sage_forward(const Graph& g, const Matrix& x, const ModelParams& p, const ModelConfig& cfg, Rng& rng,
                         std::span<const VertexId> batch) {
  if (x.rows() != g.num_vertices()) throw InputError("sage_forward: feature rows differ from vertex count");
  return sage_forward_blocks(sample_sage_blocks(g, cfg.neighbor_samples, p.weights.size(), rng, batch), x, p);
}

ModelParams sage_backward(const SageForward& fwd, const ModelParams& p, const Matrix& grad_logits) {
  return propagate_backward(fwd.blocks.ops, fwd.act, p, grad_logits, /*symmetric_ops=*/false);
}

Matrix softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    auto in = logits.row(r);
    auto dst = out.row(r);
    const double mx = *std::ranges::max_element(in);
    double total = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) total += dst[c] = std::exp(in[c] - mx);
    for (double& v : dst) v /= total;
  }
  return out;
}

LossResult cross_entropy_loss(const Matrix& logits, std::span<const std::uint32_t> labels,
                              std::span<const std::size_t> rows) {
  if (rows.empty()) throw InputError("cross_entropy_loss: empty mask");
  if (labels.size() != logits.rows()) throw InputError("cross_entropy_loss: label count differs from logits rows");
  LossResult out{0.0, Matrix(logits.rows(), logits.cols())};
  const double scale = 1.0 / static_cast<double>(rows.size());
  for (std::size_t r : rows) {
    auto in = logits.row(r);
    const std::uint32_t y = labels[r];
    if (y >= in.size()) throw InputError("cross_entropy_loss: label out of range");
    const double mx = *std::ranges::max_element(in);
    double total = 0.0;
    for (double z : in) total += std::exp(z - mx);
    const double log_total = std::log(total);
    out.loss += (log_total - (in[y] - mx)) * scale;
    auto g = out.grad_logits.row(r);
    for (std::size_t c = 0; c < in.size(); ++c) g[c] = std::exp(in[c] - mx - log_total) * scale;
    g[y] -= scale;
  }
  return out;
}

void adam_step(ModelParams& p, const ModelParams& grad, AdamState& s, double learning_rate) {
  if (!p.same_shape(grad) || !p.same_shape(s.first_moment) || !p.same_shape(s.second_moment))
    throw InputError("adam_step: shape mismatch");
  ++s.step;
  const double t = static_cast<double>(s.step);
  const double c1 = 1.0 - std::pow(AdamState::kBeta1, t);
  const double c2 = 1.0 - std::pow(AdamState::kBeta2, t);
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    auto& w = p.weights[l].data();
    const auto& g = grad.weights[l].data();
    auto& m = s.first_moment.weights[l].data();
    auto& v = s.second_moment.weights[l].data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = AdamState::kBeta1 * m[i] + (1.0 - AdamState::kBeta1) * g[i];
      v[i] = AdamState::kBeta2 * v[i] + (1.0 - AdamState::kBeta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      w[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + AdamState::kEpsilon);
    }
  }
}

std::vector<std::uint32_t> argmax_rows(const Matrix& logits) {
  std::vector<std::uint32_t> out(logits.rows());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    auto row = logits.row(r);
    out[r] = static_cast<std::uint32_t>(std::ranges::max_element(row) - row.begin());
  }
  return out;
}

double micro_f1(std::span<const std::uint32_t> predictions, std::span<const std::uint32_t> labels,
                std::span<const std::size_t> rows) {
  if (rows.empty()) throw InputError("micro_f1: empty mask");
  std::map<std::uint32_t, std::array<std::size_t, 3>> counts;  // tp, fp, fn
  for (std::size_t r : rows) {
    const auto pred = predictions[r], truth = labels[r];
    if (pred == truth) {
      ++counts[truth][0];
    } else {
      ++counts[pred][1];
      ++counts[truth][2];
    }
  }
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& [cls, c] : counts) {
    tp += c[0];
    fp += c[1];
    fn += c[2];
  }
  // Harmonic mean of micro precision and recall, 2TP / (2TP + FP + FN).
  if (tp == 0) return 0.0;
  return static_cast<double>(2 * tp) / static_cast<double>(2 * tp + fp + fn);
}

}  // namespace graphfed
